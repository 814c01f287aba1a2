"""Intrinsic (geodesic) metric of a polygonal domain.

Sharp mode: shortest paths inside a simple polygon are polylines that only
turn at reflex vertices, so exact distances come from a tiny visibility
graph over {endpoints, reflex vertices}.  The intrinsic metric of a simply
connected planar domain is nonpositively curved, hence geodesics are unique
and the machinery below never has to arbitrate between homotopy classes.

Rounded mode: every reflex corner is replaced by a tangent disc of radius
``rounding_radius`` (see geometry.py), and a taut path wraps those discs
with straight tangent segments joined by circular arcs.  The wrapped-corner
sequence is inherited from the sharp geodesic; discs the taut path does not
actually touch are dropped iteratively.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, PointOutsideDomain, RoundingTooLarge
from .geometry import (
    TAU_GEOM,
    Mode,
    PolygonalDomain,
    _cross,
    contains,
    project_to_closure,
    segment_in_closure,
)

# Turns smaller than this are treated as straight pass-throughs.


@dataclass(frozen=True)
class PathArc:
    """Circular piece of a rounded geodesic, traversed from start_angle by
    the signed sweep (positive = counterclockwise)."""

    center: np.ndarray
    radius: float
    start_angle: float
    sweep: float
    vertex_index: int

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    @property
    def entry_point(self) -> np.ndarray:
        return self.point(0.0)

    @property
    def exit_point(self) -> np.ndarray:
        return self.point(1.0)

    def point(self, frac: float) -> np.ndarray:
        th = self.start_angle + frac * self.sweep
        return self.center + self.radius * np.array([math.cos(th), math.sin(th)])

    def tangent(self, frac: float) -> np.ndarray:
        th = self.start_angle + frac * self.sweep
        s = 1.0 if self.sweep >= 0.0 else -1.0
        return s * np.array([-math.sin(th), math.cos(th)])

    def to_json_dict(self, waypoint_index: int) -> dict:
        return {
            "waypoint_index": waypoint_index,
            "vertex_index": self.vertex_index,
            "center": [float(self.center[0]), float(self.center[1])],
            "radius": self.radius,
            "start_angle": self.start_angle,
            "sweep": self.sweep,
            "entry": [float(v) for v in self.entry_point],
            "exit": [float(v) for v in self.exit_point],
        }


class GeodesicPath:
    """Arc-length parametrized shortest path.

    ``waypoints`` holds the endpoints plus the reflex vertices the path
    touches, in order (the sharp skeleton).  In rounded mode each interior
    waypoint may carry an arc annotation in ``arc_annotations`` describing
    the tangent arc actually traversed near that vertex; the traversed
    curve (tangency breakpoints, arcs) lives in the private element list
    that point_at/direction_at walk.
    """

    def __init__(self, waypoints, arc_annotations=None, mode: Mode = "sharp"):
        self.waypoints = np.asarray(waypoints, dtype=float)
        m = self.waypoints.shape[0]
        n_interior = max(m - 2, 0)
        if arc_annotations is None:
            arc_annotations = [None] * n_interior
        self.arc_annotations: list[PathArc | None] = list(arc_annotations)
        if len(self.arc_annotations) != n_interior:
            raise ValueError("one (possibly None) annotation per interior waypoint")
        self.mode = mode
        self._elements: list[tuple] = self._build_elements()
        lens = []
        for el in self._elements:
            if el[0] == "seg":
                lens.append(float(np.hypot(*(el[2] - el[1]))))
            else:
                lens.append(el[1].length)
        self._seg_lengths = np.array(lens) if lens else np.zeros(1)
        if not lens:
            self._elements = [("seg", self.waypoints[0], self.waypoints[0])]
        self._cum = np.concatenate([[0.0], np.cumsum(self._seg_lengths)])
        self.length = float(self._cum[-1])

    def _build_elements(self) -> list[tuple]:
        """Segments and arcs in traversal order.  A vertex without an arc
        annotation is a plain polyline kink; with one, the path runs
        straight to the arc's entry tangency, along the arc, and onward."""
        W = self.waypoints
        if W.shape[0] == 1:
            return []
        cursor = W[0]
        elements: list[tuple] = []
        for k in range(1, W.shape[0] - 1):
            arc = self.arc_annotations[k - 1]
            if arc is None:
                if np.hypot(*(W[k] - cursor)) > TAU_GEOM:
                    elements.append(("seg", cursor, W[k]))
                cursor = W[k]
            else:
                entry = arc.entry_point
                if np.hypot(*(entry - cursor)) > TAU_GEOM:
                    elements.append(("seg", cursor, entry))
                elements.append(("arc", arc))
                cursor = arc.exit_point
        if np.hypot(*(W[-1] - cursor)) > TAU_GEOM or not elements:
            elements.append(("seg", cursor, W[-1]))
        return elements

    def _locate(self, s: float) -> tuple[int, float]:
        s = min(max(s, 0.0), self.length)
        k = int(np.searchsorted(self._cum, s, side="right") - 1)
        k = min(k, len(self._seg_lengths) - 1)
        seg = self._seg_lengths[k]
        frac = 0.0 if seg <= 0.0 else (s - self._cum[k]) / seg
        return k, frac

    def point_at(self, s: float) -> np.ndarray:
        k, frac = self._locate(s)
        el = self._elements[k]
        if el[0] == "seg":
            return el[1] + frac * (el[2] - el[1])
        return el[1].point(frac)

    def direction_at(self, s: float) -> np.ndarray:
        k, frac = self._locate(s)
        el = self._elements[k]
        if el[0] == "arc":
            return el[1].tangent(frac)
        d = el[2] - el[1]
        n = float(np.hypot(*d))
        if n <= TAU_GEOM:
            for kk in range(k + 1, len(self._seg_lengths)):
                if self._seg_lengths[kk] > TAU_GEOM:
                    return self.direction_at(self._cum[kk])
            for kk in range(k - 1, -1, -1):
                if self._seg_lengths[kk] > TAU_GEOM:
                    return self.direction_at(self._cum[kk + 1] - TAU_GEOM)
            raise CoincidentPoints("zero-length path has no direction")
        return d / n

    def to_json_dict(self) -> dict:
        return {
            "waypoints": [[float(x), float(y)] for x, y in self.waypoints],
            "length": self.length,
            "arcs": [
                arc.to_json_dict(k + 1)
                for k, arc in enumerate(self.arc_annotations)
                if arc is not None
            ],
        }


# ---------------------------------------------------------------------------
# per-domain kernel


class _Kernel:
    """Precomputed machinery for one domain: edge tables for fast segment
    tests, the reflex-to-reflex geodesic matrix with next hops, disc data
    for rounded mode.

    The fast tests assume both segment endpoints lie in the closure; then a
    segment leaves the domain iff it properly crosses some edge, up to
    measure-zero vertex grazing, where all candidate paths tie in length
    anyway.
    """

    def __init__(self, domain: PolygonalDomain):
        self.domain = domain
        verts = domain.verts
        n = verts.shape[0]
        nxt = np.roll(verts, -1, axis=0)
        self.edges_f = [
            (float(verts[i, 0]), float(verts[i, 1]), float(nxt[i, 0]), float(nxt[i, 1]))
            for i in range(n)
        ]
        self.reflex_ids = list(domain.reflex_indices)
        self.rv = verts[self.reflex_ids] if self.reflex_ids else np.zeros((0, 2))
        self.rv_f = [(float(x), float(y)) for x, y in self.rv]
        k = len(self.reflex_ids)
        # Geodesic distances between reflex vertices, with next-hop for path
        # reconstruction.  Ties resolve toward the lowest intermediate index.
        D = np.full((k, k), np.inf)
        np.fill_diagonal(D, 0.0)
        nxt_hop = -np.ones((k, k), dtype=int)
        for i in range(k):
            for j in range(i + 1, k):
                if segment_in_closure(domain, self.rv[i], self.rv[j]):
                    D[i, j] = D[j, i] = float(np.hypot(*(self.rv[j] - self.rv[i])))
                    nxt_hop[i, j] = j
                    nxt_hop[j, i] = i
        for m in range(k):
            for i in range(k):
                for j in range(k):
                    alt = D[i, m] + D[m, j]
                    if alt < D[i, j] - 1e-15:
                        D[i, j] = alt
                        nxt_hop[i, j] = nxt_hop[i, m]
        self.D = D
        self.next_hop = nxt_hop

        # Rounded-mode disc per reflex vertex, aligned with reflex_ids.
        self.discs = {arc.vertex_index: arc for arc in domain.arcs()}

        # numpy edge tables for the batch evaluator
        self.e_a = verts.copy()
        self.e_b = nxt.copy()

    # -- fast scalar tests (inputs assumed inside the closure) -------------

    def seg_free(self, px, py, qx, qy) -> bool:
        for ax, ay, bx, by in self.edges_f:
            ex, ey = bx - ax, by - ay
            d1 = ex * (py - ay) - ey * (px - ax)
            d2 = ex * (qy - ay) - ey * (qx - ax)
            if d1 * d2 < 0.0:
                rx, ry = qx - px, qy - py
                d3 = rx * (ay - py) - ry * (ax - px)
                d4 = rx * (by - py) - ry * (bx - px)
                if d3 * d4 < 0.0:
                    return False
        return True

    def reflex_chain(self, i: int, j: int) -> list[int]:
        chain = [i]
        while i != j:
            i = int(self.next_hop[i, j])
            if i < 0:
                raise RuntimeError("disconnected reflex graph")
            chain.append(i)
        return chain

    def best_sharp(self, ax, ay, bx, by, robust: bool = False):
        """(distance, entry_reflex, exit_reflex) with None for direct pairs.

        The fast test misclassifies segments that leave the domain only
        through boundary touches, which requires both endpoints to sit
        exactly on the boundary; callers with such inputs pass robust=True.
        """
        if robust:
            a = np.array([ax, ay])
            b = np.array([bx, by])
            free = lambda p, q: segment_in_closure(self.domain, p, q)  # noqa: E731
            if free(a, b):
                return math.hypot(bx - ax, by - ay), None, None
        elif self.seg_free(ax, ay, bx, by):
            return math.hypot(bx - ax, by - ay), None, None
        k = len(self.rv_f)
        A = [math.inf] * k
        B = [math.inf] * k
        for idx, (vx, vy) in enumerate(self.rv_f):
            if robust:
                va = segment_in_closure(self.domain, np.array([ax, ay]), self.rv[idx])
                vb = segment_in_closure(self.domain, self.rv[idx], np.array([bx, by]))
            else:
                va = self.seg_free(ax, ay, vx, vy)
                vb = self.seg_free(vx, vy, bx, by)
            if va:
                A[idx] = math.hypot(vx - ax, vy - ay)
            if vb:
                B[idx] = math.hypot(bx - vx, by - vy)
        best = math.inf
        bi = bj = -1
        D = self.D
        for i in range(k):
            ai = A[i]
            if ai == math.inf:
                continue
            row = D[i]
            for j in range(k):
                bj_ = B[j]
                if bj_ == math.inf:
                    continue
                tot = ai + row[j] + bj_
                if tot < best - 1e-15:
                    best = tot
                    bi, bj = i, j
        if bi < 0:
            raise PointOutsideDomain(
                "no geodesic found; are both endpoints inside the closure?"
            )
        return best, bi, bj


def _kernel(domain: PolygonalDomain) -> _Kernel:
    if domain._kernel is None:
        object.__setattr__(domain, "_kernel", _Kernel(domain))
    return domain._kernel


def _require_inside(domain: PolygonalDomain, p: np.ndarray, mode: Mode, what: str):
    if contains(domain, p, mode) == "exterior":
        raise PointOutsideDomain(f"{what} {p.tolist()} lies outside the {mode} closure")


# ---------------------------------------------------------------------------
# public sharp-mode operations


def intrinsic_distance(domain: PolygonalDomain, a, b, mode: Mode = "sharp") -> float:
    """Length of the shortest path between two closure points."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _require_inside(domain, a, mode, "point")
    _require_inside(domain, b, mode, "point")
    if float(np.hypot(*(b - a))) <= TAU_GEOM:
        return 0.0
    if mode == "rounded":
        return _rounded_geodesic(domain, a, b).length
    ker = _kernel(domain)
    d, _, _ = ker.best_sharp(a[0], a[1], b[0], b[1], robust=True)
    return d


def geodesic(domain: PolygonalDomain, a, b, mode: Mode = "sharp") -> GeodesicPath:
    """The unique shortest path between two closure points."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _require_inside(domain, a, mode, "point")
    _require_inside(domain, b, mode, "point")
    if float(np.hypot(*(b - a))) <= TAU_GEOM:
        return GeodesicPath(np.array([a]), mode=mode)
    if mode == "rounded":
        return _rounded_geodesic(domain, a, b)
    ker = _kernel(domain)
    _, bi, bj = ker.best_sharp(a[0], a[1], b[0], b[1], robust=True)
    if bi is None:
        pts = [a] + _grazed_reflex(ker, a, b) + [b]
        return GeodesicPath(np.array(pts), mode="sharp")
    chain = ker.reflex_chain(bi, bj)
    pts = [a] + [ker.rv[i] for i in chain] + [b]
    # Drop repeats when an endpoint coincides with a chain vertex.
    out = [pts[0]]
    for p in pts[1:]:
        if np.hypot(*(p - out[-1])) > TAU_GEOM:
            out.append(p)
    return GeodesicPath(np.array(out), mode="sharp")


def _grazed_reflex(ker: _Kernel, a: np.ndarray, b: np.ndarray) -> list[np.ndarray]:
    """Reflex vertices lying on the open segment ab, in traversal order.

    A straight geodesic that grazes a corner keeps the corner as a waypoint
    so the turn structure is explicit."""
    r = b - a
    L2 = float(r @ r)
    if L2 <= TAU_GEOM * TAU_GEOM:
        return []
    found = []
    for v in ker.rv:
        t = float((v - a) @ r) / L2
        if TAU_GEOM < t < 1.0 - TAU_GEOM:
            if np.hypot(*(a + t * r - v)) <= 10.0 * TAU_GEOM:
                found.append((t, v))
    return [v for _, v in sorted(found, key=lambda tv: tv[0])]


def chi(domain: PolygonalDomain, x, y, mode: Mode = "sharp") -> np.ndarray:
    """Unit tangent at x of the geodesic from x to y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.hypot(*(y - x)) <= TAU_GEOM:
        raise CoincidentPoints("chi is undefined for coincident points")
    if mode == "rounded":
        path = _rounded_geodesic(domain, x, y)
        return path.direction_at(0.0)
    _require_inside(domain, x, mode, "point")
    _require_inside(domain, y, mode, "point")
    ker = _kernel(domain)
    _, bi, _ = ker.best_sharp(x[0], x[1], y[0], y[1], robust=True)
    target = y if bi is None else ker.rv[bi]
    d = target - x
    n = float(np.hypot(*d))
    if n <= TAU_GEOM:
        # x sits on the entry reflex vertex; aim at the next chain stop.
        path = geodesic(domain, x, y, mode)
        return path.direction_at(0.0)
    return d / n


def separation_and_direction(
    domain: PolygonalDomain, x, y, mode: Mode = "sharp"
) -> tuple[float, np.ndarray | None]:
    """Separation d(x, y) together with the pursuit direction at x, sharing
    a single shortest-path evaluation.  This is the integrator hot path;
    results match intrinsic_distance + chi.  The direction is None at
    coincidence (d <= tau_geom), where chi would refuse."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if float(np.hypot(*(y - x))) <= TAU_GEOM:
        return 0.0, None
    if mode == "rounded":
        path = geodesic(domain, x, y, mode)
        return path.length, path.direction_at(0.0)
    _require_inside(domain, x, mode, "point")
    _require_inside(domain, y, mode, "point")
    ker = _kernel(domain)
    dist, bi, bj = ker.best_sharp(x[0], x[1], y[0], y[1], robust=True)
    if bi is None:
        targets = [y]
    else:
        targets = [ker.rv[i] for i in ker.reflex_chain(bi, bj)] + [y]
    for tgt in targets:
        v = tgt - x
        n = float(np.hypot(*v))
        if n > TAU_GEOM:
            return dist, v / n
    return dist, None


def intrinsic_diameter(
    domain: PolygonalDomain, sampling_density: int = 4, mode: Mode = "sharp"
) -> float:
    """Max intrinsic distance over vertices plus per-edge boundary samples.

    Monotone non-decreasing in ``sampling_density`` (extra samples can only
    raise the max)."""
    verts = domain.verts
    n = verts.shape[0]
    pts = [verts]
    if sampling_density > 0:
        nxt = np.roll(verts, -1, axis=0)
        for s in range(1, sampling_density + 1):
            t = s / (sampling_density + 1)
            pts.append(verts + t * (nxt - verts))
    P = np.vstack(pts)
    # Candidate points sit exactly on the boundary, so the fast batched
    # tests do not apply; use the robust scalar route pair by pair.
    ker = _kernel(domain)
    best = 0.0
    for i in range(P.shape[0]):
        for j in range(i + 1, P.shape[0]):
            if mode == "rounded":
                d = _rounded_geodesic(domain, P[i], P[j]).length
            else:
                d, _, _ = ker.best_sharp(P[i, 0], P[i, 1], P[j, 0], P[j, 1], robust=True)
            if d > best:
                best = d
    return best


def certify_taut(domain: PolygonalDomain, path: GeodesicPath) -> bool:
    """Check the wedge certificate of a sharp geodesic: interior waypoints
    are reflex vertices, adjacent legs are unobstructed, the kink never
    turns more than the exterior wedge allows, and cutting the corner is
    never shorter."""
    if path.mode != "sharp":
        return True
    W = path.waypoints
    ker = _kernel(domain)
    verts = domain.verts
    n = verts.shape[0]
    for k in range(1, W.shape[0] - 1):
        v = W[k]
        hits = [i for i in domain.reflex_indices if np.hypot(*(verts[i] - v)) <= 10 * TAU_GEOM]
        if not hits:
            return False
        i = hits[0]
        u_in = v - W[k - 1]
        u_out = W[k + 1] - v
        nu_in = float(np.hypot(*u_in))
        nu_out = float(np.hypot(*u_out))
        if nu_in <= TAU_GEOM or nu_out <= TAU_GEOM:
            return False
        u_in /= nu_in
        u_out /= nu_out
        if not segment_in_closure(domain, W[k - 1], v):
            return False
        if not segment_in_closure(domain, v, W[k + 1]):
            return False
        turn = abs(math.atan2(_cross(*u_in, *u_out), float(u_in @ u_out)))
        e_prev = verts[(i - 1) % n] - v
        e_next = verts[(i + 1) % n] - v
        e_prev = e_prev / np.hypot(*e_prev)
        e_next = e_next / np.hypot(*e_next)
        wedge = math.acos(float(np.clip(e_prev @ e_next, -1.0, 1.0)))
        if turn > math.pi - wedge + 1e-9:
            return False
        if segment_in_closure(domain, W[k - 1], W[k + 1]):
            direct = float(np.hypot(*(W[k + 1] - W[k - 1])))
            if direct < nu_in + nu_out - 10 * TAU_GEOM:
                return False
    return True


# ---------------------------------------------------------------------------
# rounded mode


def _wrap(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def _entry_tangent(p: np.ndarray, c: np.ndarray, r: float, s: float):
    """Tangent from p onto disc (c, r) entering a wrap of sense s
    (s=+1 counterclockwise).  Returns (tangency point, travel direction)."""
    rel = c - p
    d = float(np.hypot(*rel))
    if d < r - 1e-9:
        raise RoundingTooLarge("path endpoint inside a corner disc")
    d = max(d, r)
    phi = math.atan2(rel[1], rel[0])
    theta = phi - s * math.asin(min(1.0, r / d))
    T = np.array([math.cos(theta), math.sin(theta)])
    t = c - s * r * np.array([-T[1], T[0]])
    return t, T


def _exit_tangent(q: np.ndarray, c: np.ndarray, r: float, s: float):
    """Tangent leaving disc (c, r) toward q after a wrap of sense s.
    Returns (tangency point, travel direction toward q)."""
    t_rev, T_rev = _entry_tangent(q, c, r, -s)
    return t_rev, -T_rev


def _pair_tangent(c1: np.ndarray, s1: float, c2: np.ndarray, s2: float, r: float):
    """Common tangent from disc 1 (sense s1) to disc 2 (sense s2), equal
    radii.  Same sense: outer tangent; opposite: inner tangent (requires
    center distance > 2r)."""
    rel = c2 - c1
    d = float(np.hypot(*rel))
    phi = math.atan2(rel[1], rel[0])
    if s1 == s2:
        theta = phi
    else:
        if d <= 2.0 * r + 1e-12:
            raise RoundingTooLarge("corner discs too close for an inner tangent")
        theta = phi + s1 * math.asin(min(1.0, 2.0 * r / d))
    T = np.array([math.cos(theta), math.sin(theta)])
    t1 = c1 - s1 * r * np.array([-T[1], T[0]])
    t2 = c2 - s2 * r * np.array([-T[1], T[0]])
    return t1, t2, T


def _sharp_anchor(domain: PolygonalDomain, p: np.ndarray) -> np.ndarray:
    if contains(domain, p, "sharp") != "exterior":
        return p
    return project_to_closure(domain, p, "sharp").point


def _rounded_geodesic(domain: PolygonalDomain, a: np.ndarray, b: np.ndarray) -> GeodesicPath:
    """Taut path in the rounded domain.

    The wrapped-corner sequence comes from the sharp geodesic between sharp
    anchors of the endpoints; each wrapped corner contributes its disc with
    the sharp turn sense.  Discs whose arc comes out backwards are dropped
    and the chain is re-tautened.
    """
    ker = _kernel(domain)
    sharp = geodesic(domain, _sharp_anchor(domain, a), _sharp_anchor(domain, b), "sharp")
    W = sharp.waypoints
    verts = domain.verts
    discs: list[tuple[int, np.ndarray, float]] = []  # (vertex_index, center, sense)
    for k in range(1, W.shape[0] - 1):
        v = W[k]
        ids = [i for i in domain.reflex_indices if np.hypot(*(verts[i] - v)) <= 10 * TAU_GEOM]
        if not ids:
            continue
        i = ids[0]
        u_in = v - W[k - 1]
        u_out = W[k + 1] - v
        chord = W[k + 1] - W[k - 1]
        clen = float(np.hypot(*chord))
        # gate on the corner's deviation from the chord, not the raw cross:
        # an endpoint sitting almost on the corner makes a leg so short that
        # cross-product noise would fake a turn sense, and a noise-sense
        # wrap survives the fixpoint as a valid long way round the disc
        if clen <= TAU_GEOM or abs(_cross(*chord, *u_in)) <= TAU_GEOM * clen:
            continue  # straight graze misses the disc
        cr = _cross(*u_in, *u_out)
        arc = ker.discs.get(i)
        if arc is None:
            continue
        discs.append((i, arc.center, 1.0 if cr > 0.0 else -1.0))

    r = domain.rounding_radius
    disc_index = [(arc.vertex_index, arc.center) for arc in domain.arcs()]

    def _worst_penetration(path: GeodesicPath):
        """Deepest incursion of a straight element into any corner disc.
        Returns (insertion position in the disc chain, vertex id, center,
        wrap sense) or None.  The taut chain only ever clips a disc the
        sharp skeleton grazed past, so the fix is to wrap it on the side
        the chord already passes."""
        worst = None
        arcs_before = 0
        for el in path._elements:
            if el[0] == "arc":
                arcs_before += 1
                continue
            p, q = el[1], el[2]
            d = q - p
            L2 = float(d @ d)
            if L2 <= TAU_GEOM * TAU_GEOM:
                continue
            for vid, c in disc_index:
                t = min(max(float((c - p) @ d) / L2, 0.0), 1.0)
                pen = r - float(np.hypot(*(p + t * d - c)))
                if pen > 1e-9 and (worst is None or pen > worst[0]):
                    # hugging the disc keeps its center on the turning side:
                    # center left of the chord means a counterclockwise wrap
                    sense = 1.0 if _cross(*d, *(c - p)) > 0.0 else -1.0
                    worst = (pen, arcs_before, vid, c, sense)
        if worst is None:
            return None
        return worst[1:]

    # Fixpoint on the wrapped-disc chain: drop discs whose arc comes out
    # backwards, insert discs a straight element dips into, stop when the
    # chain is tangent-consistent and clear of every disc.
    for _ in range(8 + 4 * len(disc_index)):
        if not discs:
            path = GeodesicPath(np.array([a, b]), mode="rounded")
        else:
            # Tangency chain: entry from a, disc-to-disc tangents, exit to b.
            t_entry: list[np.ndarray] = []
            t_exit: list[np.ndarray] = []
            t0, _ = _entry_tangent(a, discs[0][1], r, discs[0][2])
            t_entry.append(t0)
            for (i1, c1, s1), (i2, c2, s2) in zip(discs[:-1], discs[1:]):
                p1, p2, _ = _pair_tangent(c1, s1, c2, s2, r)
                t_exit.append(p1)
                t_entry.append(p2)
            te, _ = _exit_tangent(b, discs[-1][1], r, discs[-1][2])
            t_exit.append(te)

            sweeps = []
            slack = None
            for idx, (vid, c, s) in enumerate(discs):
                a_in = math.atan2(*(t_entry[idx] - c)[::-1])
                a_out = math.atan2(*(t_exit[idx] - c)[::-1])
                raw = (s * (a_out - a_in)) % (2.0 * math.pi)
                if raw > math.pi:  # wrong way round: the disc is not binding
                    raw -= 2.0 * math.pi
                sweeps.append(s * raw)
                if raw < 1e-12 and (slack is None or raw < slack[1]):
                    slack = (idx, raw)
            if slack is not None:
                discs.pop(slack[0])
                continue

            skeleton = [a]
            annotations: list[PathArc | None] = []
            for idx, (vid, c, s) in enumerate(discs):
                skeleton.append(verts[vid])
                a_in = math.atan2(*(t_entry[idx] - c)[::-1])
                annotations.append(
                    PathArc(
                        center=c,
                        radius=r,
                        start_angle=a_in,
                        sweep=sweeps[idx],
                        vertex_index=vid,
                    )
                )
            skeleton.append(b)
            path = GeodesicPath(np.array(skeleton), arc_annotations=annotations, mode="rounded")

        hit = _worst_penetration(path)
        if hit is None:
            return path
        pos, vid, c, sense = hit
        discs.insert(pos, (vid, c, sense))
    raise RuntimeError("rounded geodesic chain did not stabilize")


# ---------------------------------------------------------------------------
# vectorized separation evaluator


class SeparationEvaluator:
    """Batched intrinsic distances for sampling loops.

    Sharp mode matches :func:`intrinsic_distance` exactly away from
    measure-zero vertex grazing.  Rounded mode resolves single-disc wraps in
    closed form and falls back to the scalar solver for rarer multi-disc
    pairs.
    """

    def __init__(self, domain: PolygonalDomain, mode: Mode = "sharp"):
        self.domain = domain
        self.mode = mode
        self.ker = _kernel(domain)
        if mode == "rounded":
            from .geometry import _edge_trims  # shared trim definition

            trims = _edge_trims(domain)
            verts, nxt = domain.verts, np.roll(domain.verts, -1, axis=0)
            lo = np.array([t[0] for t in trims])[:, None]
            hi = np.array([t[1] for t in trims])[:, None]
            self.e_a = verts + lo * (nxt - verts)
            self.e_b = verts + hi * (nxt - verts)
            keep = (hi - lo)[:, 0] > TAU_GEOM
            self.e_a, self.e_b = self.e_a[keep], self.e_b[keep]
            self.discs = list(domain.arcs())
        else:
            self.e_a, self.e_b = self.ker.e_a, self.ker.e_b
            self.discs = []

    def _seg_free(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        """Proper-crossing test of each segment against the edge table."""
        A, B = self.e_a, self.e_b
        ex = (B[:, 0] - A[:, 0])[None, :]
        ey = (B[:, 1] - A[:, 1])[None, :]
        d1 = ex * (P[:, 1:2] - A[None, :, 1]) - ey * (P[:, 0:1] - A[None, :, 0])
        d2 = ex * (Q[:, 1:2] - A[None, :, 1]) - ey * (Q[:, 0:1] - A[None, :, 0])
        rx = (Q[:, 0] - P[:, 0])[:, None]
        ry = (Q[:, 1] - P[:, 1])[:, None]
        d3 = rx * (A[None, :, 1] - P[:, 1:2]) - ry * (A[None, :, 0] - P[:, 0:1])
        d4 = rx * (B[None, :, 1] - P[:, 1:2]) - ry * (B[None, :, 0] - P[:, 0:1])
        blocked = ((d1 * d2) < 0.0) & ((d3 * d4) < 0.0)
        return ~blocked.any(axis=1)

    def visible(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        vis = self._seg_free(P, Q)
        for arc in self.discs:
            c, r = arc.center, arc.radius
            d = Q - P
            L2 = np.maximum(np.einsum("ij,ij->i", d, d), TAU_GEOM * TAU_GEOM)
            t = np.clip(np.einsum("ij,ij->i", c[None, :] - P, d) / L2, 0.0, 1.0)
            near = P + t[:, None] * d
            vis &= np.hypot(*(near - c[None, :]).T) >= r - 1e-12
        return vis

    def distances(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        Q = np.asarray(Q, dtype=float)
        out = np.hypot(*(Q - P).T)
        if self.mode == "sharp":
            if not self.ker.reflex_ids:
                return out
            vis = self._seg_free(P, Q)
            todo = ~vis
            if not todo.any():
                return out
            out[todo] = self._wrapped_sharp(P[todo], Q[todo])
            return out
        vis = self.visible(P, Q)
        todo = ~vis
        if not todo.any():
            return out
        if len(self.discs) == 1:
            idx = np.nonzero(todo)[0]
            lens, sane = self._wrap_one_disc(P[idx], Q[idx], self.discs[0])
            out[idx] = lens
            for i in idx[~sane]:
                out[i] = _rounded_geodesic(self.domain, P[i], Q[i]).length
            return out
        idx = np.nonzero(todo)[0]
        for i in idx:
            out[i] = _rounded_geodesic(self.domain, P[i], Q[i]).length
        return out

    def _wrapped_sharp(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        ker = self.ker
        k = len(ker.reflex_ids)
        n = P.shape[0]
        A = np.full((n, k), np.inf)
        B = np.full((n, k), np.inf)
        for j in range(k):
            V = np.repeat(ker.rv[j : j + 1], n, axis=0)
            mP = self._seg_free(P, V)
            mQ = self._seg_free(V, Q)
            A[mP, j] = np.hypot(*(ker.rv[j] - P[mP]).T)
            B[mQ, j] = np.hypot(*(Q[mQ] - ker.rv[j]).T)
        tot = A[:, :, None] + ker.D[None, :, :] + B[:, None, :]
        return tot.reshape(n, -1).min(axis=1)

    def _wrap_one_disc(self, P: np.ndarray, Q: np.ndarray, arc):
        """Tangent-arc-tangent length around one corner disc.

        The wrap side is the side of the sharp turn at the corner vertex;
        the short angular side can run through the notch exterior.  Returns
        (lengths, sane mask); insane rows (sweep beyond pi) need the exact
        solver."""
        c, r = arc.center, arc.radius
        v = self.domain.verts[arc.vertex_index]
        A = v[None, :] - P
        B = Q - v[None, :]
        s = np.sign(A[:, 0] * B[:, 1] - A[:, 1] * B[:, 0])
        s = np.where(s == 0.0, 1.0, s)
        dp = np.maximum(np.hypot(*(P - c[None, :]).T), r)
        dq = np.maximum(np.hypot(*(Q - c[None, :]).T), r)
        phi_p = np.arctan2(c[1] - P[:, 1], c[0] - P[:, 0])
        phi_q = np.arctan2(c[1] - Q[:, 1], c[0] - Q[:, 0])
        sweep = (
            s * (phi_q - phi_p)
            + np.arcsin(np.clip(r / dp, -1.0, 1.0))
            + np.arcsin(np.clip(r / dq, -1.0, 1.0))
            + math.pi
        ) % (2.0 * math.pi)
        lens = (
            np.sqrt(np.maximum(dp * dp - r * r, 0.0))
            + np.sqrt(np.maximum(dq * dq - r * r, 0.0))
            + r * sweep
        )
        return lens, sweep <= math.pi
