"""Exception types shared across the package.

Everything raised on purpose derives from Cat0PursuitError so callers can
catch library failures without swallowing programming errors.
"""
from __future__ import annotations


class Cat0PursuitError(Exception):
    """Base class for all library errors."""


class DegeneratePolygon(Cat0PursuitError):
    """Fewer than three effective vertices, repeated points, or zero-width spikes."""


class SelfIntersecting(Cat0PursuitError):
    """Polygon boundary crosses or overlaps itself."""


class NotOnBoundary(Cat0PursuitError):
    """A boundary-only query was made for a point not on the boundary."""


class PointOutsideDomain(Cat0PursuitError):
    """An operand point lies strictly outside the domain closure."""


class CoincidentPoints(Cat0PursuitError):
    """Direction queries are undefined for (numerically) identical points."""


class DegenerateTriangle(Cat0PursuitError):
    """Triangle side lengths violate the triangle inequality beyond tolerance."""


class SharpModeUnsupported(Cat0PursuitError):
    """A smoothness check was asked for on a path with unrounded kinks."""


class ProbeOutsideDomain(Cat0PursuitError):
    """Finite-difference probes left the domain even after shrinking the step."""


class RoundingTooLarge(Cat0PursuitError):
    """Requested corner-rounding radius does not fit the polygon."""


class StepTooLarge(Cat0PursuitError):
    """Time step violates a stability precondition."""


class NonmonotoneSeparation(Cat0PursuitError):
    """Pursuit separation increased beyond the discretization allowance."""


class EpsilonTooLarge(Cat0PursuitError):
    """Capture radius is larger than the domain itself."""


class ScenarioError(Cat0PursuitError):
    """Scenario file is malformed or references unknown entities."""
