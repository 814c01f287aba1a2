"""Bundled example domains used by scenarios, tests and docs.

Each factory pins an explicit rounding radius so rounded-mode results stay
stable even if the derived default ever changes.
"""
from __future__ import annotations

import math

from .geometry import PolygonalDomain


def unit_square() -> PolygonalDomain:
    return PolygonalDomain.from_vertices(
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], rounding_radius=0.25
    )


def lshape() -> PolygonalDomain:
    """2x2 square with the upper-right unit square removed; one reflex corner."""
    return PolygonalDomain.from_vertices(
        [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)],
        rounding_radius=0.2,
    )


def zchannel() -> PolygonalDomain:
    """Width-1 zig-zag corridor with two reflex corners of opposite sense."""
    return PolygonalDomain.from_vertices(
        [
            (0.0, 0.0),
            (2.0, 0.0),
            (2.0, 2.0),
            (4.0, 2.0),
            (4.0, 3.0),
            (1.0, 3.0),
            (1.0, 1.0),
            (0.0, 1.0),
        ],
        rounding_radius=0.2,
    )


def ngon20() -> PolygonalDomain:
    """Regular 20-gon of circumradius 1, a convex near-disc."""
    pts = [
        (math.cos(2.0 * math.pi * k / 20.0), math.sin(2.0 * math.pi * k / 20.0))
        for k in range(20)
    ]
    return PolygonalDomain.from_vertices(pts, rounding_radius=0.25)


def star5() -> PolygonalDomain:
    """Five-pointed star, outer radius 1 and inner radius 0.5.

    Spikes are wide enough that every inner clearance stays comparable to
    the inner radius (no comb-like teeth).
    """
    pts = []
    for k in range(5):
        a_out = math.radians(18.0 + 72.0 * k)
        a_in = math.radians(54.0 + 72.0 * k)
        pts.append((math.cos(a_out), math.sin(a_out)))
        pts.append((0.5 * math.cos(a_in), 0.5 * math.sin(a_in)))
    return PolygonalDomain.from_vertices(pts, rounding_radius=0.15)


BUNDLED_DOMAINS = {
    "unit_square": unit_square,
    "lshape": lshape,
    "zchannel": zchannel,
    "ngon20": ngon20,
    "star5": star5,
}


def bundled_domain(name: str) -> PolygonalDomain:
    try:
        factory = BUNDLED_DOMAINS[name]
    except KeyError:
        raise KeyError(
            f"unknown bundled domain {name!r}; choose from {sorted(BUNDLED_DOMAINS)}"
        ) from None
    return factory()
