"""Numerical checks of the quantitative metric estimates.

Each check evaluates one inequality on concrete inputs and returns a
CheckReport instead of asserting, so callers (tests, the CLI verify
command) decide how to aggregate.  Status is three-valued: several
estimates only claim anything below a closeness threshold, and above it
the honest answer is NOT-APPLICABLE, not PASS.

One margin convention throughout: the stated tolerance is folded into
the margin, so status is PASS exactly when margin >= 0.  Raw observed
values and bounds are kept in ``details`` for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoincidentPoints,
    DegenerateTriangle,
    ProbeOutsideDomain,
    ScenarioError,
    SharpModeUnsupported,
)
from .geometry import (
    TAU_GEOM,
    Mode,
    PolygonalDomain,
    boundary_clearance,
    contains,
    points_inside,
    project_points,
)
from .metric import SeparationEvaluator, GeodesicPath, chi, geodesic, intrinsic_distance

LIPSCHITZ_FACTOR = 4.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class CheckReport:
    name: str
    status: str  # "PASS" | "FAIL" | "NOT-APPLICABLE"
    margin: float
    details: dict

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    @property
    def applicable(self) -> bool:
        return self.status != "NOT-APPLICABLE"

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "margin": float(self.margin),
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _verdict(name: str, margin: float, details: dict) -> CheckReport:
    status = "PASS" if margin >= 0.0 else "FAIL"
    return CheckReport(name, status, float(margin), details)


def fit_power_law(xs, ys) -> tuple[float, float]:
    """Least-squares fit ys ~ scale * xs**exponent; returns (exponent, scale).

    Non-positive entries are dropped; with fewer than two usable points the
    fit is undefined and (nan, nan) is returned.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = (xs > 0.0) & (ys > 0.0)
    if int(keep.sum()) < 2:
        return float("nan"), float("nan")
    slope, intercept = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)
    return float(slope), float(math.exp(intercept))


def _effective_radius(domain: PolygonalDomain) -> float:
    return 2.0 * domain.rounding_radius * math.sin(domain.cone_angle)


def _closeness_threshold(domain: PolygonalDomain) -> float:
    return min(domain.cone_radius / (4.0 * domain.lipschitz), _effective_radius(domain))


# ---------------------------------------------------------------------------
# comparison-triangle check


def cat0_triangle_check(
    domain: PolygonalDomain,
    a,
    b,
    c,
    grid_n: int = 16,
    mode: Mode = "sharp",
) -> CheckReport:
    """Compare intrinsic chords of the triangle abc against the flat
    comparison triangle with the same side lengths.

    Chords connect the geodesics a->b and a->c at a grid_n x grid_n grid of
    arc-length pairs; the thin-triangle comparison requires every intrinsic
    chord to be no longer than the matching flat chord, up to
    tau_cat = 1e-6 * euclidean diameter.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    scale = max(1.0, domain.euclidean_diameter)
    tau_cat = 1e-6 * domain.euclidean_diameter

    path_ab = geodesic(domain, a, b, mode=mode)
    path_ac = geodesic(domain, a, c, mode=mode)
    d_ab = path_ab.length
    d_ac = path_ac.length
    d_bc = intrinsic_distance(domain, b, c, mode=mode)

    sides = sorted((d_ab, d_ac, d_bc))
    if sides[2] > sides[0] + sides[1] + TAU_GEOM * scale:
        raise DegenerateTriangle(
            f"side lengths ({d_ab:.12g}, {d_ac:.12g}, {d_bc:.12g}) violate the "
            "triangle inequality; the metric is inconsistent"
        )

    # flat comparison corners: A at the origin, B on the positive x-axis.
    cx = 0.0 if d_ab <= 0.0 else (d_ab * d_ab + d_ac * d_ac - d_bc * d_bc) / (2.0 * d_ab)
    cy = math.sqrt(max(0.0, d_ac * d_ac - cx * cx))
    if d_ac > 0.0:
        ucx, ucy = cx / d_ac, cy / d_ac
    else:
        ucx, ucy = 0.0, 0.0

    ss = np.linspace(0.0, d_ab, grid_n)
    tt = np.linspace(0.0, d_ac, grid_n)
    P = np.array([path_ab.point_at(s) for s in ss])
    Q = np.array([path_ac.point_at(t) for t in tt])
    SS, TT = np.meshgrid(ss, tt, indexing="ij")
    comp = np.hypot(SS - TT * ucx, TT * ucy)

    ev = SeparationEvaluator(domain, mode=mode)
    P_rep = np.repeat(P, grid_n, axis=0)
    Q_til = np.tile(Q, (grid_n, 1))
    chords = ev.distances(P_rep, Q_til).reshape(grid_n, grid_n)

    # The batched evaluator's visibility test can misclassify endpoints that
    # sit exactly on the boundary (geodesic samples do land on reflex
    # vertices).  Any pair that is close to a violation, or involves a
    # boundary sample, gets recomputed with the robust scalar path before we
    # believe the verdict.
    on_bdy_P = np.array([contains(domain, p, mode=mode) == "boundary" for p in P])
    on_bdy_Q = np.array([contains(domain, q, mode=mode) == "boundary" for q in Q])
    suspect = (chords - comp > -10.0 * tau_cat) | on_bdy_P[:, None] | on_bdy_Q[None, :]
    n_recomputed = int(suspect.sum())
    if n_recomputed:
        ii, jj = np.nonzero(suspect)
        for i, j in zip(ii, jj):
            chords[i, j] = intrinsic_distance(domain, P[i], Q[j], mode=mode)

    violation = chords - comp
    k = int(np.argmax(violation))
    i_max, j_max = divmod(k, grid_n)
    max_violation = float(violation[i_max, j_max])

    details = {
        "sides": [d_ab, d_ac, d_bc],
        "comparison_corner": [cx, cy],
        "grid_n": grid_n,
        "mode": mode,
        "tau_cat": tau_cat,
        "max_violation": max_violation,
        "argmax_st": [float(ss[i_max]), float(tt[j_max])],
        "n_recomputed": n_recomputed,
    }
    return _verdict("cat0_triangle", tau_cat - max_violation, details)


# ---------------------------------------------------------------------------
# metric sandwich (intrinsic vs Euclidean for close pairs)


def metric_sandwich_check(domain: PolygonalDomain, a, b, mode: Mode = "rounded") -> CheckReport:
    """For close pairs:  r_eff*sin(d/r_eff) <= |a-b| <= d <= 2|a-b|,
    with r_eff = 2*r*sin(alpha), claimed for |a-b| below
    min{cone_radius/(4*lipschitz), r_eff}.  Above the threshold the check
    is NOT-APPLICABLE."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r_eff = _effective_radius(domain)
    threshold = _closeness_threshold(domain)
    e = float(np.hypot(*(a - b)))
    details: dict = {"euclidean": e, "threshold": threshold, "r_eff": r_eff, "mode": mode}
    if e >= threshold:
        return CheckReport("metric_sandwich", "NOT-APPLICABLE", threshold - e, details)

    d = intrinsic_distance(domain, a, b, mode=mode)
    m_upper = d - e                                   # |a-b| <= d
    m_lower = e - r_eff * math.sin(d / r_eff)         # chord of the bounding arc
    m_double = 2.0 * e - d                            # d <= 2|a-b|
    details.update(
        {
            "intrinsic": d,
            "margin_upper": m_upper,
            "margin_lower": m_lower,
            "margin_double": m_double,
        }
    )
    return _verdict("metric_sandwich", min(m_upper, m_lower, m_double) + TAU_GEOM, details)


# ---------------------------------------------------------------------------
# direction field regularity along a rounded geodesic


def direction_lipschitz_check(
    path: GeodesicPath,
    domain: PolygonalDomain,
    n_samples: int = 256,
    tau_lip: float = 0.05,
) -> CheckReport:
    """Max difference quotient of the unit tangent along the path against
    the bound (4/sqrt(3)) / (2*r*sin(alpha)), with tau_lip relative slack
    for the discrete sampling.  Sharp paths kink at reflex vertices, where
    the quotient diverges, so sharp mode is refused outright."""
    if path.mode != "rounded":
        raise SharpModeUnsupported("direction field of a sharp geodesic is not Lipschitz")
    bound = LIPSCHITZ_FACTOR / _effective_radius(domain)
    allowed = bound * (1.0 + tau_lip)
    details: dict = {"bound": bound, "tau_lip": tau_lip, "n_samples": n_samples}
    if path.length <= TAU_GEOM or n_samples < 2:
        details["max_ratio"] = 0.0
        return _verdict("direction_lipschitz", allowed, details)

    ss = np.linspace(0.0, path.length, n_samples)
    T = np.array([path.direction_at(s) for s in ss])
    iu, ju = np.triu_indices(n_samples, 1)
    num = np.hypot(T[ju, 0] - T[iu, 0], T[ju, 1] - T[iu, 1])
    den = ss[ju] - ss[iu]
    ratios = num / den
    k = int(np.argmax(ratios))
    details["max_ratio"] = float(ratios[k])
    details["argmax_s"] = [float(ss[iu[k]]), float(ss[ju[k]])]
    return _verdict("direction_lipschitz", allowed - float(ratios[k]), details)


# ---------------------------------------------------------------------------
# chord approximation (second-order Taylor control of the path)


def chord_approx_check(path: GeodesicPath, t: float, domain: PolygonalDomain) -> CheckReport:
    """|path(t) - path(0) - t*path'(0)| <= (4/3) * t^2 / (2*r*sin(alpha))
    for t below the closeness threshold; rounded mode only."""
    if path.mode != "rounded":
        raise SharpModeUnsupported("chord estimate needs the rounded direction field")
    r_eff = _effective_radius(domain)
    threshold = _closeness_threshold(domain)
    details: dict = {"t": float(t), "threshold": threshold, "r_eff": r_eff}
    if not (0.0 < t < threshold):
        return CheckReport("chord_approx", "NOT-APPLICABLE", threshold - t, details)
    if t > path.length + TAU_GEOM:
        details["path_length"] = path.length
        return CheckReport("chord_approx", "NOT-APPLICABLE", path.length - t, details)

    t_eval = min(float(t), path.length)
    p0 = path.point_at(0.0)
    d0 = path.direction_at(0.0)
    lhs = float(np.hypot(*(path.point_at(t_eval) - p0 - t_eval * d0)))
    rhs = (4.0 / 3.0) * t_eval * t_eval / r_eff
    details.update({"lhs": lhs, "rhs": rhs})
    return _verdict("chord_approx", rhs + TAU_GEOM - lhs, details)


# ---------------------------------------------------------------------------
# gradient of the distance function vs the direction field


_PROBE_DIRS = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


def gauss_check(
    domain: PolygonalDomain,
    x,
    y,
    h: float | None = None,
    mode: Mode = "sharp",
    tolerance: float = 5e-3,
) -> CheckReport:
    """Central-difference gradient g of d(., y) at x must satisfy
    |g + chi(x, y)| <= tolerance; also fits the decay exponent of the
    linearization residual  d(x+s*e, y) - d(x,y) + s*<e, chi>  over
    s in {h, h/2, h/4} for each axis probe direction.

    Probes falling outside the domain shrink h once (factor 2), then
    raise ProbeOutsideDomain."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diam = domain.euclidean_diameter
    if h is None:
        h = 1e-4 * diam
    d0 = intrinsic_distance(domain, x, y, mode=mode)
    if d0 <= TAU_GEOM:
        raise CoincidentPoints("distance gradient is undefined at the far endpoint")
    # keep the probe stencil well inside the far field of y
    h = min(float(h), d0 / 10.0)

    scales = np.array([1.0, 0.5, 0.25])
    for attempt in range(2):
        probes = x[None, None, :] + h * scales[None, :, None] * _PROBE_DIRS[:, None, :]
        flat = probes.reshape(-1, 2)
        if all(contains(domain, p, mode=mode) != "exterior" for p in flat):
            break
        h *= 0.5
    else:
        raise ProbeOutsideDomain(f"probe stencil at h={h:.3g} leaves the domain near {x.tolist()}")

    dist = np.array(
        [[intrinsic_distance(domain, probes[k, s_i], y, mode=mode) for s_i in range(3)] for k in range(4)]
    )
    g = np.array(
        [
            (dist[0, 0] - dist[1, 0]) / (2.0 * h),
            (dist[2, 0] - dist[3, 0]) / (2.0 * h),
        ]
    )
    chi_v = chi(domain, x, y, mode=mode)
    grad_err = float(np.hypot(*(g + chi_v)))

    steps = h * scales
    floor = 1e-12 * max(1.0, diam)
    residuals = dist - d0 + steps[None, :] * (_PROBE_DIRS @ chi_v)[:, None]
    exponents = []
    for k in range(4):
        absr = np.abs(residuals[k])
        if absr.min() > floor:
            exponents.append(fit_power_law(steps, absr)[0])

    details = {
        "h": float(h),
        "d0": d0,
        "mode": mode,
        "tolerance": tolerance,
        "gradient": g,
        "chi": chi_v,
        "grad_err": grad_err,
        "residuals": residuals,
        "exponents": exponents,
        "exponent_min": float(min(exponents)) if exponents else None,
    }
    return _verdict("gauss_gradient", tolerance - grad_err, details)


# ---------------------------------------------------------------------------
# sampled suites over a whole domain

# The primitives above judge one triangle, pair or path.  The suites below
# draw a deterministic sample and aggregate the worst margin, which is what
# the CLI verify command and the bundled check scenarios run.


def sample_interior_points(
    domain: PolygonalDomain,
    n: int,
    seed: int = 0,
    mode: Mode = "rounded",
    min_clearance: float = 0.0,
) -> np.ndarray:
    """Rejection-sample n interior points, reproducibly for a given seed."""
    rng = np.random.default_rng(seed)
    lo = domain.verts.min(axis=0)
    hi = domain.verts.max(axis=0)
    out: list[np.ndarray] = []
    for _ in range(200):
        cand = rng.uniform(lo, hi, size=(max(4 * n, 64), 2))
        keep = points_inside(domain, cand, mode)
        if min_clearance > 0.0:
            keep &= boundary_clearance(domain, cand, mode) >= min_clearance
        out.extend(cand[keep])
        if len(out) >= n:
            return np.array(out[:n])
    raise ScenarioError(
        f"could not sample {n} interior points with clearance {min_clearance:g}"
    )


def _aggregate(name: str, reports: list[CheckReport], extra: dict | None = None) -> CheckReport:
    applicable = [r for r in reports if r.applicable]
    n_skipped = len(reports) - len(applicable)
    details: dict = {"n": len(reports), "n_skipped": n_skipped}
    if extra:
        details.update(extra)
    if not applicable:
        return CheckReport(name, "NOT-APPLICABLE", 0.0, details)
    worst = min(applicable, key=lambda r: r.margin)
    details["worst"] = worst.details
    status = "PASS" if all(r.passed for r in applicable) else "FAIL"
    return CheckReport(name, status, worst.margin, details)


def cat0_suite(
    domain: PolygonalDomain,
    n_triangles: int = 25,
    grid_n: int = 12,
    seed: int = 0,
    mode: Mode = "sharp",
) -> CheckReport:
    pts = sample_interior_points(domain, 3 * n_triangles, seed, mode)
    reports = [
        cat0_triangle_check(
            domain, pts[3 * k], pts[3 * k + 1], pts[3 * k + 2], grid_n, mode
        )
        for k in range(n_triangles)
    ]
    return _aggregate(
        "cat0_triangles", reports, {"n_triangles": n_triangles, "grid_n": grid_n}
    )


def gauss_suite(
    domain: PolygonalDomain, n_pairs: int = 12, seed: int = 0, mode: Mode = "sharp"
) -> CheckReport:
    diam = domain.euclidean_diameter
    # the probe stencil spans about 1e-4 * diam around x, so keep that clear
    pts = sample_interior_points(
        domain, 6 * n_pairs, seed, mode, min_clearance=1e-3 * diam
    )
    reports = []
    for k in range(0, len(pts) - 1, 2):
        if len(reports) == n_pairs:
            break
        x, y = pts[k], pts[k + 1]
        if float(np.hypot(*(x - y))) < 0.2 * diam:
            continue
        reports.append(gauss_check(domain, x, y, mode=mode))
    return _aggregate("gauss_gradient", reports)


def sandwich_suite(
    domain: PolygonalDomain, n_pairs: int = 100, seed: int = 0, mode: Mode = "rounded"
) -> CheckReport:
    thr = _closeness_threshold(domain)
    base = sample_interior_points(domain, n_pairs, seed, mode)
    rng = np.random.default_rng(seed + 1)
    ang = rng.uniform(0.0, 2.0 * math.pi, n_pairs)
    rad = rng.uniform(0.05, 0.95, n_pairs) * thr
    partner = base + rad[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    partner = project_points(domain, partner, mode)
    reports = [
        metric_sandwich_check(domain, a, b, mode) for a, b in zip(base, partner)
    ]
    return _aggregate("metric_sandwich", reports, {"threshold": thr})


def _sampled_paths(domain: PolygonalDomain, n_paths: int, seed: int) -> list[GeodesicPath]:
    pts = sample_interior_points(domain, 2 * n_paths, seed, "rounded")
    paths = []
    for k in range(n_paths):
        a, b = pts[2 * k], pts[2 * k + 1]
        if float(np.hypot(*(a - b))) <= TAU_GEOM:
            continue
        paths.append(geodesic(domain, a, b, mode="rounded"))
    return paths


def direction_suite(domain: PolygonalDomain, n_paths: int = 12, seed: int = 0) -> CheckReport:
    reports = [
        direction_lipschitz_check(p, domain)
        for p in _sampled_paths(domain, n_paths, seed)
        if p.length > TAU_GEOM
    ]
    return _aggregate("direction_lipschitz", reports)


def chord_suite(
    domain: PolygonalDomain, n_paths: int = 12, seed: int = 0, ts=None
) -> CheckReport:
    r = domain.rounding_radius
    if ts is None:
        ts = (r / 8.0, r / 4.0, r / 2.0)
    reports = []
    for p in _sampled_paths(domain, n_paths, seed):
        for t in ts:
            reports.append(chord_approx_check(p, t, domain))
    return _aggregate("chord_approx", reports, {"ts": list(ts)})
