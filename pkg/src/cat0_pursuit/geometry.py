"""Polygonal domain model: validation, membership, projection, normals.

A domain is the closed region bounded by one simple polygon, stored
counterclockwise.  Everything downstream (geodesics, pursuit, reflected
diffusions) goes through this module for point classification and for the
metric projection onto the closure.

Two boundary models coexist:

* ``sharp``   -- the polygon itself.  Reflex corners are genuine kinks.
* ``rounded`` -- every reflex corner is replaced by a circular arc of radius
  ``rounding_radius`` tangent to both incident edges.  The little region
  between the corner and the arc is added to the domain, which makes the
  boundary C^1 with a uniform exterior tangent disc of radius r at every
  boundary point.  Convex corners are left alone (exterior discs of any
  radius already fit there).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    DegeneratePolygon,
    NotOnBoundary,
    RoundingTooLarge,
    SelfIntersecting,
)

# Absolute geometric tolerance, in domain units.  Bundled domains are O(1).
TAU_GEOM = 1e-9

Mode = Literal["sharp", "rounded"]


def _cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


@dataclass(frozen=True)
class DomainReport:
    """Facts established while validating a vertex list."""

    is_simple: bool
    orientation_fixed: bool
    reflex_vertex_indices: tuple[int, ...]
    max_admissible_rounding: float
    euclidean_diameter: float

    def to_json_dict(self) -> dict:
        r = self.max_admissible_rounding
        return {
            "is_simple": self.is_simple,
            "orientation_fixed": self.orientation_fixed,
            "reflex_vertex_indices": list(self.reflex_vertex_indices),
            "max_admissible_rounding": None if math.isinf(r) else r,
            "euclidean_diameter": self.euclidean_diameter,
        }


@dataclass(frozen=True)
class Projection:
    """Result of projecting a point onto the domain closure."""

    point: np.ndarray
    distance: float
    within_reach: bool
    edge_index: int  # -1 when the point was already inside, -2 for an arc
    param: float


@dataclass(frozen=True)
class CornerArc:
    """Tangent arc replacing one reflex corner in rounded mode."""

    vertex_index: int
    center: np.ndarray
    radius: float
    tangent_in: np.ndarray  # on the incoming edge
    tangent_out: np.ndarray  # on the outgoing edge
    tangent_length: float
    wedge_angle: float  # exterior wedge at the corner, in (0, pi)

    def angular_span(self) -> tuple[float, float]:
        """Start angle and signed sweep (about center) from tangent_in to
        tangent_out.  The arc extent is pi - wedge < pi, so wrapping the
        difference into (-pi, pi] always lands on the boundary side; reflex
        corners of a CCW polygon sweep clockwise (negative)."""
        a0 = math.atan2(*(self.tangent_in - self.center)[::-1])
        a1 = math.atan2(*(self.tangent_out - self.center)[::-1])
        sweep = (a1 - a0 + math.pi) % (2.0 * math.pi) - math.pi
        return a0, sweep


def _pairwise_edge_distance(p0, p1, q0, q1) -> float:
    """Distance between two closed segments."""
    candidates = [
        _point_segment_distance(p0, q0, q1),
        _point_segment_distance(p1, q0, q1),
        _point_segment_distance(q0, p0, p1),
        _point_segment_distance(q1, p0, p1),
    ]
    return min(candidates)


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom <= TAU_GEOM * TAU_GEOM:
        return float(np.hypot(*(p - a)))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.hypot(*(p - (a + t * ab))))


def _proper_intersect(p0, p1, q0, q1) -> bool:
    """True when open segments cross at a single interior point."""
    d1 = _cross(q1[0] - q0[0], q1[1] - q0[1], p0[0] - q0[0], p0[1] - q0[1])
    d2 = _cross(q1[0] - q0[0], q1[1] - q0[1], p1[0] - q0[0], p1[1] - q0[1])
    d3 = _cross(p1[0] - p0[0], p1[1] - p0[1], q0[0] - p0[0], q0[1] - p0[1])
    d4 = _cross(p1[0] - p0[0], p1[1] - p0[1], q1[0] - p0[0], q1[1] - p0[1])
    eps = TAU_GEOM
    return (d1 * d2 < -eps * eps) and (d3 * d4 < -eps * eps)


def validate_domain(vertices) -> DomainReport:
    """Validate a polygon vertex list.

    Raises DegeneratePolygon for repeated or collinear-collapsing vertices
    and SelfIntersecting when the boundary crosses or overlaps itself.
    A clockwise input is accepted and reported as reoriented.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
        raise DegeneratePolygon("need at least three planar vertices")
    n = verts.shape[0]

    scale = max(1.0, float(np.abs(verts).max()))
    tau = TAU_GEOM * scale

    nxt = np.roll(verts, -1, axis=0)
    if np.any(np.hypot(*(nxt - verts).T) <= tau):
        raise DegeneratePolygon("repeated consecutive vertices")

    # Collinear triples collapse the vertex: either a straight pass-through
    # (turn 0) or a zero-width spike (turn pi).  Both are rejected.
    prv = np.roll(verts, 1, axis=0)
    e_in = verts - prv
    e_out = nxt - verts
    crosses = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    norms = np.hypot(*e_in.T) * np.hypot(*e_out.T)
    if np.any(np.abs(crosses) <= tau * norms):
        raise DegeneratePolygon("collinear-collapsing vertex")

    area2 = float(np.sum(verts[:, 0] * nxt[:, 1] - nxt[:, 0] * verts[:, 1]))
    orientation_fixed = area2 < 0.0
    if orientation_fixed:
        verts = verts[::-1].copy()
        nxt = np.roll(verts, -1, axis=0)

    # Simplicity: non-adjacent edge pairs must neither cross nor touch.
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            p0, p1 = verts[i], verts[(i + 1) % n]
            q0, q1 = verts[j], verts[(j + 1) % n]
            if _proper_intersect(p0, p1, q0, q1):
                raise SelfIntersecting(f"edges {i} and {j} cross")
            if _pairwise_edge_distance(p0, p1, q0, q1) <= tau:
                raise SelfIntersecting(f"edges {i} and {j} touch")

    prv = np.roll(verts, 1, axis=0)
    e_in = verts - prv
    e_out = nxt - verts
    crosses = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    reflex = tuple(int(i) for i in np.nonzero(crosses < 0.0)[0])

    diam = 0.0
    for i in range(n):
        d = np.hypot(*(verts[i + 1 :] - verts[i]).T)
        if d.size:
            diam = max(diam, float(d.max()))

    max_round = _max_admissible_rounding(verts, reflex)

    return DomainReport(
        is_simple=True,
        orientation_fixed=orientation_fixed,
        reflex_vertex_indices=reflex,
        max_admissible_rounding=max_round,
        euclidean_diameter=diam,
    )


def _max_admissible_rounding(verts: np.ndarray, reflex: tuple[int, ...]) -> float:
    """Largest radius whose corner arcs provably fit.

    Conservative: tangent lengths are held to half of each incident edge and
    to the clearance from the corner to non-incident edges, so the cap stays
    clear of the rest of the boundary.
    """
    if not reflex:
        return math.inf
    n = verts.shape[0]
    best = math.inf
    for i in reflex:
        prev_v = verts[(i - 1) % n]
        next_v = verts[(i + 1) % n]
        v = verts[i]
        u_in = prev_v - v
        u_out = next_v - v
        len_in = float(np.hypot(*u_in))
        len_out = float(np.hypot(*u_out))
        # Exterior wedge angle at a reflex corner: angle between the two
        # boundary rays measured through the complement, in (0, pi).
        cosw = float(u_in @ u_out) / (len_in * len_out)
        wedge = math.acos(max(-1.0, min(1.0, cosw)))
        clearance = math.inf
        for j in range(n):
            if j in (i, (i - 1) % n):
                continue
            clearance = min(
                clearance,
                _point_segment_distance(v, verts[j], verts[(j + 1) % n]),
            )
        t_budget = min(0.5 * len_in, 0.5 * len_out, clearance)
        best = min(best, t_budget * math.tan(0.5 * wedge))
    return best


@dataclass(frozen=True, eq=False)
class PolygonalDomain:
    """Closed region bounded by one simple CCW polygon.

    ``rounding_radius`` parametrizes the rounded boundary model,
    ``cone_radius``/``cone_angle`` witness the uniform interior cone and
    ``lipschitz`` is the matching boundary-graph slope cot(cone_angle).
    Use :meth:`from_vertices` to derive defaults from the geometry.
    """

    vertices: tuple[tuple[float, float], ...]
    rounding_radius: float
    cone_radius: float
    cone_angle: float
    report: DomainReport = field(repr=False)

    @classmethod
    def from_vertices(
        cls,
        vertices,
        rounding_radius: float | None = None,
        cone_radius: float | None = None,
        cone_angle: float | None = None,
    ) -> "PolygonalDomain":
        report = validate_domain(vertices)
        verts = np.asarray(vertices, dtype=float)
        if report.orientation_fixed:
            verts = verts[::-1].copy()

        gap = _min_edge_gap(verts)
        if cone_radius is None:
            cone_radius = 0.5 * gap  # half the minimum feature size
        if cone_angle is None:
            cone_angle = _derived_cone_angle(verts)
        if rounding_radius is None:
            if math.isinf(report.max_admissible_rounding):
                rounding_radius = 0.25 * gap
            else:
                rounding_radius = 0.5 * report.max_admissible_rounding
        if rounding_radius > report.max_admissible_rounding + TAU_GEOM:
            raise RoundingTooLarge(
                f"rounding radius {rounding_radius} exceeds admissible "
                f"{report.max_admissible_rounding}"
            )
        if not (0.0 < cone_angle <= 0.5 * math.pi):
            raise DegeneratePolygon("cone angle must lie in (0, pi/2]")

        dom = cls(
            vertices=tuple((float(x), float(y)) for x, y in verts),
            rounding_radius=float(rounding_radius),
            cone_radius=float(cone_radius),
            cone_angle=float(cone_angle),
            report=report,
        )
        return dom

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "_verts", verts)
        object.__setattr__(self, "_next", np.roll(verts, -1, axis=0))
        ev = self._next - verts
        el = np.hypot(*ev.T)
        object.__setattr__(self, "_edge_vec", ev)
        object.__setattr__(self, "_edge_len", el)
        # Outward normals of CCW edges point to the right of the edge vector.
        object.__setattr__(
            self, "_edge_normal", np.stack([ev[:, 1], -ev[:, 0]], axis=1) / el[:, None]
        )
        object.__setattr__(self, "_scale", max(1.0, float(np.abs(verts).max())))
        object.__setattr__(self, "_arcs", None)
        object.__setattr__(self, "_kernel", None)

    # -- derived scalars -------------------------------------------------

    @property
    def lipschitz(self) -> float:
        return 1.0 / math.tan(self.cone_angle)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def verts(self) -> np.ndarray:
        return self._verts

    @property
    def reflex_indices(self) -> tuple[int, ...]:
        return self.report.reflex_vertex_indices

    @property
    def euclidean_diameter(self) -> float:
        return self.report.euclidean_diameter

    @property
    def min_edge_gap(self) -> float:
        return _min_edge_gap(self._verts)

    @property
    def oracle_feature_size(self) -> float:
        """Length scale a background grid must resolve.

        Minimum of reflex-corner clearances, non-adjacent vertex spacing and
        the bounding-box sides.  Unlike ``min_edge_gap`` this ignores the
        near-contact of edges that merely share a short convex chain, which
        matters for fine regular polygons.
        """
        verts = self._verts
        n = verts.shape[0]
        best = min(float(np.ptp(verts[:, 0])), float(np.ptp(verts[:, 1])))
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                best = min(best, float(np.hypot(*(verts[j] - verts[i]))))
        for i in self.reflex_indices:
            for j in range(n):
                if j in (i, (i - 1) % n):
                    continue
                best = min(
                    best,
                    _point_segment_distance(verts[i], verts[j], verts[(j + 1) % n]),
                )
        return best

    def arcs(self) -> tuple[CornerArc, ...]:
        """Corner arcs of the rounded boundary model (possibly empty)."""
        if self._arcs is None:
            object.__setattr__(self, "_arcs", self._build_arcs())
        return self._arcs

    def _build_arcs(self) -> tuple[CornerArc, ...]:
        out = []
        r = self.rounding_radius
        verts = self._verts
        n = verts.shape[0]
        for i in self.reflex_indices:
            v = verts[i]
            u_in = verts[(i - 1) % n] - v
            u_out = verts[(i + 1) % n] - v
            u_in /= np.hypot(*u_in)
            u_out /= np.hypot(*u_out)
            cosw = float(np.clip(u_in @ u_out, -1.0, 1.0))
            wedge = math.acos(cosw)
            t_len = r / math.tan(0.5 * wedge)
            p_in = v + u_in * t_len
            p_out = v + u_out * t_len
            bis = u_in + u_out
            bis /= np.hypot(*bis)
            center = v + bis * (r / math.sin(0.5 * wedge))
            out.append(
                CornerArc(
                    vertex_index=i,
                    center=center,
                    radius=r,
                    tangent_in=p_in,
                    tangent_out=p_out,
                    tangent_length=t_len,
                    wedge_angle=wedge,
                )
            )
        return tuple(out)

    def to_json_dict(self) -> dict:
        return {
            "vertices": [[x, y] for x, y in self.vertices],
            "rounding_radius": self.rounding_radius,
            "cone_radius": self.cone_radius,
            "cone_angle": self.cone_angle,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PolygonalDomain":
        return cls.from_vertices(
            data["vertices"],
            rounding_radius=data.get("rounding_radius"),
            cone_radius=data.get("cone_radius"),
            cone_angle=data.get("cone_angle"),
        )


def _min_edge_gap(verts: np.ndarray) -> float:
    """Minimum distance between non-adjacent boundary edges."""
    n = verts.shape[0]
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            best = min(
                best,
                _pairwise_edge_distance(
                    verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]
                ),
            )
    return best


def _derived_cone_angle(verts: np.ndarray) -> float:
    """Half the tightest corner opening, the widest uniformly valid cone."""
    n = verts.shape[0]
    best = 0.5 * math.pi
    for i in range(n):
        u_in = verts[(i - 1) % n] - verts[i]
        u_out = verts[(i + 1) % n] - verts[i]
        u_in = u_in / np.hypot(*u_in)
        u_out = u_out / np.hypot(*u_out)
        theta = math.acos(float(np.clip(u_in @ u_out, -1.0, 1.0)))
        cross = u_in[0] * u_out[1] - u_in[1] * u_out[0]
        interior = theta if cross < 0.0 else 2.0 * math.pi - theta
        best = min(best, 0.5 * min(interior, 2.0 * math.pi - interior))
    return best


# ---------------------------------------------------------------------------
# membership


def contains(domain: PolygonalDomain, p, mode: Mode = "sharp") -> str:
    """Classify a point as ``interior``, ``boundary`` or ``exterior``."""
    p = np.asarray(p, dtype=float)
    tau = TAU_GEOM * domain._scale
    if mode == "rounded":
        for arc in domain.arcs():
            if _in_corner_wedge(arc, domain, p):
                d = float(np.hypot(*(p - arc.center))) - arc.radius
                if abs(d) <= tau:
                    return "boundary"
                return "interior" if d > 0.0 else "exterior"
    verts = domain._verts
    nxt = domain._next
    dmin = _point_edges_distance(p, verts, nxt)
    if dmin <= tau:
        return "boundary"
    return "interior" if _crossing_inside(p, verts, nxt) else "exterior"


def _point_edges_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", p[None, :] - a, ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return float(np.min(np.hypot(*(p[None, :] - proj).T)))


def _crossing_inside(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> bool:
    # Half-open rule on the +x ray; boundary cases are resolved before this.
    ya, yb = a[:, 1], b[:, 1]
    cond = (ya > p[1]) != (yb > p[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = a[:, 0] + (p[1] - ya) / (yb - ya) * (b[:, 0] - a[:, 0])
    hits = cond & (xs > p[0])
    return bool(np.count_nonzero(hits) % 2 == 1)


def _in_corner_wedge(arc: CornerArc, domain: PolygonalDomain, p: np.ndarray) -> bool:
    """True within the closed triangle (corner, tangent_in, tangent_out)."""
    v = domain._verts[arc.vertex_index]
    tau = TAU_GEOM * domain._scale
    for a, b in ((v, arc.tangent_in), (arc.tangent_in, arc.tangent_out), (arc.tangent_out, v)):
        if _cross(b[0] - a[0], b[1] - a[1], p[0] - a[0], p[1] - a[1]) < -tau * 4.0:
            return False
    return True


def _edge_cache(domain: PolygonalDomain):
    """Per-domain edge precomputation shared by the vectorized tests.

    Products against the point array go through matmul so the per-edge
    work is one BLAS call instead of a chain of broadcast temporaries."""
    try:
        return domain._edge_cache_
    except AttributeError:
        pass
    verts = domain._verts
    nxt = domain._next
    ab = nxt - verts
    dy = ab[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(dy != 0.0, ab[:, 0] / np.where(dy != 0.0, dy, 1.0), 0.0)
    denom = np.einsum("ij,ij->i", ab, ab)
    # inward edge normals (vertices are CCW), normalized
    nrm = np.stack([-ab[:, 1], ab[:, 0]], axis=1) / np.sqrt(denom)[:, None]
    cache = {
        "AB": ab.copy(),
        "ax": verts[:, 0].copy(),
        "ay": verts[:, 1].copy(),
        "abx": ab[:, 0].copy(),
        "aby": ab[:, 1].copy(),
        "by": nxt[:, 1].copy(),
        "slope": slope,
        "inv_denom": 1.0 / denom,
        "a_dot_ab": np.einsum("ij,ij->i", verts, ab),
        "N": nrm,
        "n_off": np.einsum("ij,ij->i", nrm, verts),
        "convex": len(domain.reflex_indices) == 0,
    }
    object.__setattr__(domain, "_edge_cache_", cache)
    return cache


def points_inside(domain: PolygonalDomain, pts: np.ndarray, mode: Mode = "sharp") -> np.ndarray:
    """Vectorized closure membership for an (n, 2) array."""
    tau = TAU_GEOM * domain._scale
    ec = _edge_cache(domain)
    if ec["convex"]:
        # intersection of inward half-planes, tau-tolerant
        s = pts @ ec["N"].T
        s -= ec["n_off"][None, :]
        return (s >= -tau).all(axis=1)
    px = pts[:, 0:1]
    py = pts[:, 1:2]
    ya = ec["ay"][None, :]
    cond = (ya > py) != (ec["by"][None, :] > py)
    xs = ec["ax"][None, :] + (py - ya) * ec["slope"][None, :]
    inside = (np.count_nonzero(cond & (xs > px), axis=1) % 2).astype(bool)
    # points within tau of an edge count as inside regardless of parity
    inside |= _points_edges_min_sqdist(pts, ec) <= tau * tau
    if mode == "rounded":
        for arc in domain.arcs():
            wedge = _points_in_wedge(arc, domain, pts)
            d = np.hypot(*(pts - arc.center[None, :]).T) - arc.radius
            inside = np.where(wedge, d >= -tau, inside)
    return inside


def _points_edges_min_sqdist(pts: np.ndarray, ec: dict) -> np.ndarray:
    # clamp parameter via one matmul; the distance itself must come from
    # explicit residuals, since the expanded quadratic form cancels
    # catastrophically for points sitting on an edge
    ap_ab = pts @ ec["AB"].T
    ap_ab -= ec["a_dot_ab"][None, :]
    t = ap_ab * ec["inv_denom"][None, :]
    np.clip(t, 0.0, 1.0, out=t)
    rx = pts[:, 0:1] - ec["ax"][None, :]
    ry = pts[:, 1:2] - ec["ay"][None, :]
    rx -= t * ec["abx"][None, :]
    ry -= t * ec["aby"][None, :]
    rx *= rx
    ry *= ry
    rx += ry
    return rx.min(axis=1)


def boundary_clearance(domain: PolygonalDomain, pts: np.ndarray, mode: Mode = "sharp") -> np.ndarray:
    """Conservative lower bound on distance from inside points to the boundary.

    Edges enter untrimmed (convex domains via signed line distances) and
    arcs as whole circles; both relaxations only shrink the value, and a
    tau safety margin comes off at the end.  A point inside the closure
    cannot leave it without traveling at least this far, which is what
    lets steppers skip the membership re-test for rows with slack.  Values
    for outside points carry no meaning.
    """
    tau = TAU_GEOM * domain._scale
    ec = _edge_cache(domain)
    if ec["convex"]:
        s = pts @ ec["N"].T
        s -= ec["n_off"][None, :]
        lb = s.min(axis=1)
    else:
        lb = np.sqrt(_points_edges_min_sqdist(pts, ec))
    if mode == "rounded":
        for arc in domain.arcs():
            d = np.abs(np.hypot(*(pts - arc.center[None, :]).T) - arc.radius)
            np.minimum(lb, d, out=lb)
    return np.maximum(lb - tau, 0.0)


def _points_in_wedge(arc: CornerArc, domain: PolygonalDomain, pts: np.ndarray) -> np.ndarray:
    v = domain._verts[arc.vertex_index]
    tau = TAU_GEOM * domain._scale
    ok = np.ones(pts.shape[0], dtype=bool)
    for a, b in ((v, arc.tangent_in), (arc.tangent_in, arc.tangent_out), (arc.tangent_out, v)):
        s = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        ok &= s >= -tau * 4.0
    return ok


# ---------------------------------------------------------------------------
# projection


def project_to_closure(domain: PolygonalDomain, p, mode: Mode = "sharp") -> Projection:
    """Nearest point of the closure.

    Identity (distance 0) for points already inside.  Ties between equally
    near boundary features are broken toward the lowest edge index, then the
    lowest edge parameter, so results are reproducible bit for bit.  The
    ``within_reach`` flag is False when the point is farther than the
    rounding radius, where nearest-point projection loses its Lipschitz
    control.
    """
    p = np.asarray(p, dtype=float)
    if contains(domain, p, mode) != "exterior":
        return Projection(point=p.copy(), distance=0.0, within_reach=True, edge_index=-1, param=0.0)
    tau = TAU_GEOM * domain._scale
    best = None  # (distance, kind_rank, index, param, point)
    verts, nxt = domain._verts, domain._next
    trims = _edge_trims(domain) if mode == "rounded" else None
    for i in range(domain.n_vertices):
        a, b = verts[i], nxt[i]
        lo, hi = (0.0, 1.0) if trims is None else trims[i]
        if hi <= lo:
            continue
        ab = b - a
        denom = float(ab @ ab)
        t = float(np.clip((p - a) @ ab / denom, lo, hi))
        q = a + t * ab
        d = float(np.hypot(*(p - q)))
        cand = (d, 0, i, t, q)
        if best is None or _closer(cand, best, tau):
            best = cand
    if mode == "rounded":
        for k, arc in enumerate(domain.arcs()):
            q = _project_point_arc(arc, p)
            d = float(np.hypot(*(p - q)))
            cand = (d, 1, k, 0.0, q)
            if best is None or _closer(cand, best, tau):
                best = cand
    d, kind, idx, t, q = best
    return Projection(
        point=q,
        distance=d,
        within_reach=d < domain.rounding_radius,
        edge_index=idx if kind == 0 else -2,
        param=t,
    )


def _closer(cand, best, tau: float) -> bool:
    if cand[0] < best[0] - tau:
        return True
    if cand[0] > best[0] + tau:
        return False
    return (cand[1], cand[2], cand[3]) < (best[1], best[2], best[3])


def _edge_trims(domain: PolygonalDomain) -> list[tuple[float, float]]:
    """Per-edge parameter window once corner arcs trim the reflex ends."""
    try:
        return domain._edge_trims_
    except AttributeError:
        pass
    trims = [(0.0, 1.0)] * domain.n_vertices
    n = domain.n_vertices
    for arc in domain.arcs():
        i = arc.vertex_index
        e_in = (i - 1) % n
        lo, hi = trims[e_in]
        trims[e_in] = (lo, min(hi, 1.0 - arc.tangent_length / domain._edge_len[e_in]))
        lo, hi = trims[i]
        trims[i] = (max(lo, arc.tangent_length / domain._edge_len[i]), hi)
    object.__setattr__(domain, "_edge_trims_", trims)
    return trims


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def _project_point_arc(arc: CornerArc, p: np.ndarray) -> np.ndarray:
    rel = p - arc.center
    rn = float(np.hypot(*rel))
    a0, sweep = arc.angular_span()
    if rn <= TAU_GEOM:
        # Center of the exterior disc: all arc points tie; take the midpoint.
        th = a0 + 0.5 * sweep
        return arc.center + arc.radius * np.array([math.cos(th), math.sin(th)])
    off = _wrap_angle(math.atan2(rel[1], rel[0]) - a0)
    lo, hi = (sweep, 0.0) if sweep < 0.0 else (0.0, sweep)
    if not (lo <= off <= hi):
        # Clamp to the angularly nearer arc endpoint.
        off = 0.0 if abs(_wrap_angle(off)) <= abs(_wrap_angle(off - sweep)) else sweep
    th = a0 + off
    return arc.center + arc.radius * np.array([math.cos(th), math.sin(th)])


def project_points(domain: PolygonalDomain, pts: np.ndarray, mode: Mode = "sharp") -> np.ndarray:
    """Vectorized nearest-point projection of an (n, 2) array."""
    pts = np.asarray(pts, dtype=float)
    inside = points_inside(domain, pts, mode)
    if inside.all():
        return pts.copy()
    out = pts.copy()
    sel = ~inside
    sub = pts[sel]
    verts, nxt = domain._verts, domain._next
    ab = nxt - verts
    denom = np.einsum("ij,ij->i", ab, ab)
    if mode == "rounded" and domain.arcs():
        trims = np.array(_edge_trims(domain))
        lo, hi = trims[:, 0], trims[:, 1]
    else:
        lo = np.zeros(domain.n_vertices)
        hi = np.ones(domain.n_vertices)
    ap = sub[:, None, :] - verts[None, :, :]
    t = np.einsum("pij,ij->pi", ap, ab) / denom[None, :]
    t = np.clip(t, lo[None, :], hi[None, :])
    proj = verts[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = np.hypot(*(sub[:, None, :] - proj).transpose(2, 0, 1))
    # Degenerate fully-trimmed edges are excluded.
    d[:, hi <= lo] = np.inf
    idx = np.argmin(d, axis=1)
    rows = np.arange(sub.shape[0])
    bestd = d[rows, idx]
    bestp = proj[rows, idx]
    if mode == "rounded":
        two_pi = 2.0 * math.pi
        for arc in domain.arcs():
            rel = sub - arc.center[None, :]
            th = np.arctan2(rel[:, 1], rel[:, 0])
            a0, sweep = arc.angular_span()
            off = (th - a0 + math.pi) % two_pi - math.pi
            lo, hi = (sweep, 0.0) if sweep < 0.0 else (0.0, sweep)
            outside = (off < lo) | (off > hi)
            d_start = np.abs((off + math.pi) % two_pi - math.pi)
            d_end = np.abs((off - sweep + math.pi) % two_pi - math.pi)
            clamped = np.where(d_start <= d_end, 0.0, sweep)
            off = np.where(outside, clamped, off)
            tha = a0 + off
            qa = arc.center[None, :] + arc.radius * np.stack(
                [np.cos(tha), np.sin(tha)], axis=1
            )
            da = np.hypot(*(sub - qa).T)
            better = da < bestd
            bestd = np.where(better, da, bestd)
            bestp = np.where(better[:, None], qa, bestp)
    out[sel] = bestp
    return out


# ---------------------------------------------------------------------------
# exterior normals


def exterior_normals(domain: PolygonalDomain, x, mode: Mode = "sharp") -> list[np.ndarray]:
    """Unit vectors whose exterior tangent discs witness boundary regularity.

    Edge interior: the single outward edge normal.  Convex vertex: the two
    edge normals bounding the outward fan, in CCW order.  Sharp reflex
    vertex: empty (no exterior disc fits).  In rounded mode a reflex corner
    is served by its arc; querying the original corner point returns the arc
    normal at the nearest arc point.
    """
    x = np.asarray(x, dtype=float)
    tau = 10.0 * TAU_GEOM * domain._scale
    verts, nxt = domain._verts, domain._next
    n = domain.n_vertices

    if mode == "rounded":
        for arc in domain.arcs():
            v = verts[arc.vertex_index]
            if np.hypot(*(x - v)) <= tau:
                q = _project_point_arc(arc, v)
                nu = (arc.center - q) / arc.radius
                return [nu]
            rel = x - arc.center
            rn = float(np.hypot(*rel))
            if abs(rn - arc.radius) <= tau and _in_corner_wedge(arc, domain, x):
                return [(arc.center - x) / rn]

    # Vertex hits take precedence over edge hits.
    for i in range(n):
        if np.hypot(*(x - verts[i])) <= tau:
            if i in domain.reflex_indices:
                if mode == "rounded":
                    continue  # already handled above
                return []
            n_prev = domain._edge_normal[(i - 1) % n]
            n_next = domain._edge_normal[i]
            return [n_prev.copy(), n_next.copy()]

    trims = _edge_trims(domain) if mode == "rounded" else None
    for i in range(n):
        a = verts[i]
        ab = domain._edge_vec[i]
        L = domain._edge_len[i]
        t = float((x - a) @ ab) / (L * L)
        lo, hi = (0.0, 1.0) if trims is None else trims[i]
        if lo - tau / L <= t <= hi + tau / L:
            q = a + t * ab
            if np.hypot(*(x - q)) <= tau:
                return [domain._edge_normal[i].copy()]
    raise NotOnBoundary(f"point {x.tolist()} is not on the {mode} boundary")


# ---------------------------------------------------------------------------
# segment containment (the workhorse of visibility queries)


def segment_in_closure(domain: PolygonalDomain, p, q) -> bool:
    """True when the closed segment pq stays inside the sharp closure.

    Robust to endpoints on the boundary and to passes through polygon
    vertices: every boundary-touch parameter splits the segment, and each
    open piece is classified by its midpoint.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    tau = TAU_GEOM * domain._scale
    r = q - p
    seg_len = float(np.hypot(*r))
    if seg_len <= tau:
        return contains(domain, p) != "exterior"

    events = [0.0, 1.0]
    verts, nxt = domain._verts, domain._next
    for i in range(domain.n_vertices):
        a, b = verts[i], nxt[i]
        s = b - a
        denom = _cross(r[0], r[1], s[0], s[1])
        qp = a - p
        if abs(denom) > tau:
            t = _cross(qp[0], qp[1], s[0], s[1]) / denom
            u = _cross(qp[0], qp[1], r[0], r[1]) / denom
            if -tau <= t <= 1.0 + tau and -tau <= u <= 1.0 + tau:
                events.append(min(1.0, max(0.0, t)))
        elif abs(_cross(qp[0], qp[1], r[0], r[1])) <= tau * max(1.0, seg_len):
            # Collinear overlap: both endpoints of the shared stretch split us.
            rr = seg_len * seg_len
            for end in (a, b):
                t = float((end - p) @ r) / rr
                if -tau <= t <= 1.0 + tau:
                    events.append(min(1.0, max(0.0, t)))
    events = sorted(set(events))
    for t0, t1 in zip(events[:-1], events[1:]):
        if t1 - t0 <= tau:
            continue
        mid = p + (0.5 * (t0 + t1)) * r
        if contains(domain, mid) == "exterior":
            return False
    return True
