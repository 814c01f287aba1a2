"""Greedy pursuit: the Lion follows the pursuit field chi at unit speed,
the Man runs a pluggable strategy, both are kept inside the domain by
nearest-point projection (the discrete normal push-back).

The integrator is deliberately plain explicit Euler: chi is continuous
but not smooth, so a higher-order scheme buys nothing.  Alongside the
integrator live the trajectory-level verifications: the capture-time
budget, the first-variation identity for the separation derivative, and
the total-curvature budget for the Lion's turning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EpsilonTooLarge,
    NonmonotoneSeparation,
    PointOutsideDomain,
    ScenarioError,
    StepTooLarge,
)
from .geometry import (
    TAU_GEOM,
    Mode,
    PolygonalDomain,
    _cross,
    contains,
    project_to_closure,
)
from .metric import intrinsic_distance, separation_and_direction
from .verify import CheckReport, LIPSCHITZ_FACTOR, _verdict

# ---------------------------------------------------------------------------
# capture-time budget


@dataclass(frozen=True)
class CaptureBound:
    """Quadratic budget in q = sqrt(t): a*q^2 - b*q - c has exactly one
    positive root q_c, and greedy pursuit closes to epsilon/2 separation
    before t_c = q_c^2.  ``degenerate`` marks the vacuous case
    epsilon/2 >= diam_intr where the chase is over before it starts."""

    diam_intr: float
    epsilon: float
    a: float
    b: float
    c: float
    q_c: float
    t_c: float
    degenerate: bool = False

    def to_json_dict(self) -> dict:
        return {
            "diam_intr": self.diam_intr,
            "epsilon": self.epsilon,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "q_c": self.q_c,
            "t_c": self.t_c,
            "degenerate": self.degenerate,
        }


def capture_time_bound(diam_intr: float, epsilon: float) -> CaptureBound:
    if epsilon <= 0.0 or diam_intr <= 0.0:
        raise EpsilonTooLarge("capture radius and diameter must both be positive")
    a = (math.pi / 2.0) / (math.sqrt(2.0) * diam_intr)
    c = math.pi / 2.0
    if epsilon / 2.0 >= diam_intr:
        return CaptureBound(diam_intr, epsilon, a, 0.0, c, 0.0, 0.0, degenerate=True)
    b = (2.0 * math.sqrt(2.0) / epsilon) * math.sqrt(diam_intr - epsilon / 2.0)
    q_c = (b + math.sqrt(b * b + 4.0 * a * c)) / (2.0 * a)
    return CaptureBound(diam_intr, epsilon, a, b, c, q_c, q_c * q_c)


# ---------------------------------------------------------------------------
# evader strategies


class EvaderStrategy:
    """Velocity policy of the Man; |velocity| <= 1 (unit speed cap).

    One object drives one trace at a time: reset() is called by the
    integrator before stepping, then velocity() once per step.
    """

    kind = "base"

    def reset(self, domain: PolygonalDomain, y0: np.ndarray, dt: float, mode: Mode, epsilon: float):
        self.domain = domain
        self.dt = dt
        self.mode: Mode = mode
        self.epsilon = epsilon

    def velocity(self, t: float, y: np.ndarray, x: np.ndarray, d_intr: float) -> np.ndarray:
        raise NotImplementedError


class Stationary(EvaderStrategy):
    kind = "stationary"

    def velocity(self, t, y, x, d_intr):
        return np.zeros(2)


class RunAway(EvaderStrategy):
    """Continues the geodesic from the Lion through its own position: the
    unique derivative-maximizing evasion, and the adversarial baseline."""

    kind = "run_away"

    def velocity(self, t, y, x, d_intr):
        if d_intr <= TAU_GEOM:
            return np.zeros(2)
        _, toward_lion = separation_and_direction(self.domain, y, x, self.mode)
        if toward_lion is None:
            return np.zeros(2)
        return -toward_lion


class WallHug(EvaderStrategy):
    """Slides along the boundary at a small standoff, reversing when the
    Lion closes in from ahead.  Exists to keep the normal push-back terms
    active for a whole trace, which run_away rarely manages."""

    kind = "wall_hug"

    def __init__(self, offset_steps: float = 2.0):
        self.offset_steps = float(offset_steps)

    def reset(self, domain, y0, dt, mode, epsilon):
        super().reset(domain, y0, dt, mode, epsilon)
        self.sign = 1.0
        self.cooldown = 0
        self.offset = self.offset_steps * dt

    def _nearest_edge(self, p: np.ndarray) -> tuple[np.ndarray, float]:
        """(unit tangent of nearest edge in polygon orientation, distance)."""
        verts = self.domain.verts
        nxt = np.roll(verts, -1, axis=0)
        best = None
        for a, b in zip(verts, nxt):
            ab = b - a
            L2 = float(ab @ ab)
            if L2 <= TAU_GEOM * TAU_GEOM:
                continue
            s = min(max(float((p - a) @ ab) / L2, 0.0), 1.0)
            dist = float(np.hypot(*(p - (a + s * ab))))
            if best is None or dist < best[1]:
                best = (ab / math.sqrt(L2), dist)
        return best

    def velocity(self, t, y, x, d_intr):
        tangent, dist = self._nearest_edge(y)
        inward = np.array([-tangent[1], tangent[0]])  # interior is left of a ccw edge
        if self.cooldown > 0:
            self.cooldown -= 1
        elif d_intr < 4.0 * self.epsilon:
            _, toward_lion = separation_and_direction(self.domain, y, x, self.mode)
            if toward_lion is not None and float(toward_lion @ (self.sign * tangent)) > 0.6:
                self.sign = -self.sign
                self.cooldown = max(int(2.0 * self.epsilon / self.dt), 1)
        # normal speed closes the standoff error, the rest goes to sliding
        vn = min(max((self.offset - dist) / self.dt, -0.5), 0.5)
        vt = math.sqrt(max(1.0 - vn * vn, 0.0))
        return self.sign * vt * tangent + vn * inward


class ScriptedWaypoints(EvaderStrategy):
    kind = "scripted_waypoints"

    def __init__(self, waypoints, cycle: bool = True):
        self.waypoints = np.asarray(waypoints, dtype=float)
        if self.waypoints.ndim != 2 or self.waypoints.shape[0] < 1:
            raise ScenarioError("scripted_waypoints needs at least one 2-D waypoint")
        self.cycle = bool(cycle)

    def reset(self, domain, y0, dt, mode, epsilon):
        super().reset(domain, y0, dt, mode, epsilon)
        for w in self.waypoints:
            if contains(domain, w, mode) == "exterior":
                raise PointOutsideDomain(f"waypoint {w.tolist()} is outside the domain")
        self.idx = 0
        self.done = False

    def velocity(self, t, y, x, d_intr):
        if self.done:
            return np.zeros(2)
        for _ in range(self.waypoints.shape[0] + 1):
            w = self.waypoints[self.idx]
            d, u = separation_and_direction(self.domain, y, w, self.mode)
            if d > 2.0 * self.dt and u is not None:
                return u
            if self.idx + 1 < self.waypoints.shape[0]:
                self.idx += 1
            elif self.cycle:
                self.idx = 0
            else:
                self.done = True
                return np.zeros(2)
        return np.zeros(2)


class RandomTurn(EvaderStrategy):
    """Unit-speed heading diffusing like a Brownian angle (scale
    turn_rate * sqrt(dt) per step), seeded for reproducibility."""

    kind = "random_turn"

    def __init__(self, seed: int, turn_rate: float = 3.0):
        self.seed = int(seed)
        self.turn_rate = float(turn_rate)

    def reset(self, domain, y0, dt, mode, epsilon):
        super().reset(domain, y0, dt, mode, epsilon)
        self.rng = np.random.default_rng(self.seed)
        self.theta = float(self.rng.uniform(0.0, 2.0 * math.pi))

    def velocity(self, t, y, x, d_intr):
        self.theta += self.turn_rate * math.sqrt(self.dt) * float(self.rng.standard_normal())
        return np.array([math.cos(self.theta), math.sin(self.theta)])


STRATEGY_KINDS = {
    cls.kind: cls for cls in (Stationary, RunAway, WallHug, ScriptedWaypoints, RandomTurn)
}


def evader_strategy(kind: str, **params) -> EvaderStrategy:
    try:
        cls = STRATEGY_KINDS[kind]
    except KeyError:
        raise ScenarioError(
            f"unknown evader strategy {kind!r}; known: {sorted(STRATEGY_KINDS)}"
        ) from None
    return cls(**params)


# ---------------------------------------------------------------------------
# the integrator


@dataclass
class PursuitTrace:
    dt: float
    epsilon: float
    mode: str
    evader_kind: str
    t: np.ndarray          # (n,)
    x: np.ndarray          # (n, 2) Lion
    y: np.ndarray          # (n, 2) Man
    d_intr: np.ndarray     # (n,)
    lion_turn: np.ndarray  # (n,) signed turning increment, radians
    captured_at: float | None

    @property
    def n_samples(self) -> int:
        return self.t.shape[0]

    @property
    def captured(self) -> bool:
        return self.captured_at is not None

    def csv_rows(self):
        """Rows matching the trace CSV header t,x1,x2,y1,y2,d_intr,lion_turn."""
        for k in range(self.n_samples):
            yield (
                self.t[k],
                self.x[k, 0],
                self.x[k, 1],
                self.y[k, 0],
                self.y[k, 1],
                self.d_intr[k],
                self.lion_turn[k],
            )


def _monotonicity_slack(domain: PolygonalDomain, dt: float, d: float, epsilon: float,
                        near_corner: bool, corner_coeff: float) -> float:
    """Per-step allowance for separation increase.

    Second-order integrator error through the direction field's curvature,
    plus a configuration term when the pair is close, plus the kink
    allowance: the step on which the Lion rounds a sharp reflex corner can
    overshoot by dt*(1 - cos(kink)) because chi turns discontinuously there.
    """
    r_eff = 2.0 * domain.rounding_radius * math.sin(domain.cone_angle)
    slack = 2.0 * dt * dt * LIPSCHITZ_FACTOR / r_eff + TAU_GEOM
    slack += 2.0 * dt * dt / max(d, epsilon / 2.0)
    if near_corner:
        slack += dt * corner_coeff
    return slack


def simulate_pursuit(
    domain: PolygonalDomain,
    x0,
    y0,
    evader: EvaderStrategy,
    dt: float,
    epsilon: float,
    t_max: float,
    mode: Mode = "sharp",
) -> PursuitTrace:
    """Explicit Euler with projection:
    x <- proj(x + chi(x,y) dt),  y <- proj(y + H dt),
    stopping at separation epsilon/2 or t_max.

    Raises StepTooLarge when dt violates min{delta/(8 lambda), r/4, eps/8},
    and NonmonotoneSeparation when a step increases the separation beyond
    the discretization slack, which indicates a chi or geodesic defect.
    """
    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    if contains(domain, x, mode) == "exterior":
        raise PointOutsideDomain(f"Lion start {x.tolist()} outside the {mode} closure")
    if contains(domain, y, mode) == "exterior":
        raise PointOutsideDomain(f"Man start {y.tolist()} outside the {mode} closure")
    dt_cap = min(
        domain.cone_radius / (8.0 * domain.lipschitz),
        domain.rounding_radius / 4.0,
        epsilon / 8.0,
    )
    if dt > dt_cap * (1.0 + 1e-12):
        raise StepTooLarge(
            f"dt={dt:g} exceeds min(delta/(8*lambda), r/4, eps/8) = {dt_cap:g}"
        )
    if t_max <= 0.0:
        raise ScenarioError("t_max must be positive")

    reflex = domain.verts[list(domain.reflex_indices)] if domain.reflex_indices else None
    corner_coeff = 0.0
    for arc in domain.arcs():
        corner_coeff = max(corner_coeff, 1.0 - math.cos(math.pi - arc.wedge_angle))

    evader.reset(domain, y, dt, mode, epsilon)
    d, u = separation_and_direction(domain, x, y, mode)

    ts = [0.0]
    xs = [x.copy()]
    ys = [y.copy()]
    ds = [d]
    turns = [0.0]
    captured_at = 0.0 if d <= epsilon / 2.0 else None
    prev_dir = None
    k = 0
    while captured_at is None and (k + 1) * dt <= t_max * (1.0 + 1e-12):
        k += 1
        H = evader.velocity(ts[-1], y, x, d)
        H = np.asarray(H, dtype=float)
        nh = float(np.hypot(*H))
        if nh > 1.0 + 1e-12:
            H = H / nh
        if u is None:  # pre-capture separation is > eps/2 >= 4 dt, unreachable
            raise NonmonotoneSeparation("pursuit direction vanished before capture")
        x_new = project_to_closure(domain, x + u * dt, mode).point
        y_new = project_to_closure(domain, y + H * dt, mode).point
        d_new, u_new = separation_and_direction(domain, x_new, y_new, mode)

        near_corner = False
        if reflex is not None:
            gap = min(
                float(np.hypot(*(reflex - x).T).min()),
                float(np.hypot(*(reflex - x_new).T).min()),
            )
            near_corner = gap <= 2.5 * dt
        slack = _monotonicity_slack(domain, dt, d, epsilon, near_corner, corner_coeff)
        if d_new - d > slack:
            raise NonmonotoneSeparation(
                f"separation rose {d:.9g} -> {d_new:.9g} at t={k * dt:.6g} "
                f"(allowed slack {slack:.3g})"
            )

        disp = x_new - x
        nd = float(np.hypot(*disp))
        turn = 0.0
        if nd > 0.3 * dt:
            cur_dir = disp / nd
            if prev_dir is not None:
                turn = math.atan2(_cross(*prev_dir, *cur_dir), float(prev_dir @ cur_dir))
            prev_dir = cur_dir

        x, y, d, u = x_new, y_new, d_new, u_new
        ts.append(k * dt)
        xs.append(x.copy())
        ys.append(y.copy())
        ds.append(d)
        turns.append(turn)
        if d <= epsilon / 2.0:
            captured_at = k * dt

    return PursuitTrace(
        dt=dt,
        epsilon=epsilon,
        mode=mode,
        evader_kind=evader.kind,
        t=np.array(ts),
        x=np.array(xs),
        y=np.array(ys),
        d_intr=np.array(ds),
        lion_turn=np.array(turns),
        captured_at=captured_at,
    )


# ---------------------------------------------------------------------------
# trajectory-level verifications


def first_variation_check(trace: PursuitTrace, domain: PolygonalDomain, c_fv: float = 2.0) -> CheckReport:
    """Per-step finite difference of the separation against the predicted
    derivative -(1 - |H| cos(angle(H, arrival direction at y))).

    The prediction only holds where the geodesic varies smoothly, so steps
    are excluded when (a) either walker was clipped by the boundary
    projection, or (b) the geodesic changed combinatorics across the step
    (a visible jump of the Lion's heading or of the arrival direction).
    Excluded counts are reported, not hidden.
    """
    n = trace.n_samples
    if n < 3:
        return CheckReport("first_variation", "NOT-APPLICABLE", 0.0, {"n_steps": n - 1})
    dt = trace.dt
    mode: Mode = trace.mode  # type: ignore[assignment]

    arrival = np.zeros((n, 2))
    for k in range(n):
        if trace.d_intr[k] <= TAU_GEOM:
            continue
        _, toward_lion = separation_and_direction(domain, trace.y[k], trace.x[k], mode)
        if toward_lion is not None:
            arrival[k] = -toward_lion

    derivs = np.diff(trace.d_intr) / dt
    residuals = np.zeros(n - 1)
    excluded = np.zeros(n - 1, dtype=bool)
    jump_tol = 0.05
    for k in range(n - 1):
        h_eff = (trace.y[k + 1] - trace.y[k]) / dt
        speed = float(np.hypot(*h_eff))
        x_step = float(np.hypot(*(trace.x[k + 1] - trace.x[k])))
        clipped = x_step < dt * (1.0 - 1e-6) or speed > 1.0 + 1e-6
        turn_jump = abs(trace.lion_turn[k + 1]) > jump_tol if k + 1 < n else False
        arr_jump = float(np.hypot(*(arrival[k + 1] - arrival[k]))) > jump_tol
        excluded[k] = clipped or turn_jump or arr_jump
        cos_a = float(h_eff @ arrival[k]) / speed if speed > 1e-12 else 0.0
        predicted = -(1.0 - speed * min(cos_a, 1.0))
        residuals[k] = derivs[k] - predicted

    used = ~excluded
    max_res = float(np.abs(residuals[used]).max()) if used.any() else 0.0
    allowed = c_fv * math.sqrt(dt)
    details = {
        "max_residual": max_res,
        "allowed": allowed,
        "c_fv": c_fv,
        "n_steps": int(n - 1),
        "n_excluded": int(excluded.sum()),
        "mean_derivative": float(derivs.mean()),
    }
    return _verdict("first_variation", allowed - max_res, details)


def total_curvature(trace: PursuitTrace) -> float:
    """Accumulated absolute turning of the Lion over the recorded trace."""
    return float(np.abs(trace.lion_turn).sum())


def curvature_bound_check(
    trace: PursuitTrace, epsilon: float, diam_intr: float, tau_curv: float = 1e-9
) -> CheckReport:
    """Running turning budget: tau(t) <= (2*sqrt(2)/eps) * sqrt(diam - eps/2) * sqrt(t)
    at every recorded sample (all samples are at separation >= eps/2)."""
    if diam_intr <= epsilon / 2.0:
        return CheckReport(
            "curvature_bound", "NOT-APPLICABLE", 0.0, {"reason": "vacuous capture radius"}
        )
    coeff = (2.0 * math.sqrt(2.0) / epsilon) * math.sqrt(diam_intr - epsilon / 2.0)
    cum = np.cumsum(np.abs(trace.lion_turn))
    bound = coeff * np.sqrt(trace.t)
    margins = bound + tau_curv - cum
    k = int(np.argmin(margins))
    details = {
        "tau_total": float(cum[-1]),
        "coefficient": coeff,
        "worst_t": float(trace.t[k]),
        "worst_margin": float(margins[k]),
    }
    return _verdict("curvature_bound", float(margins[k]), details)
