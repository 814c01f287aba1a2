"""Co-adapted couplings of reflected planar Brownian motions.

Everything here runs the same discrete scheme: free increment, then
nearest-point projection back into the closure, with increments longer
than half the rounding radius subdivided so every projected hop stays
well inside the projection's contraction regime.  On top of that sit
the coupling strategies (the (J, K) matrix pairs applied to the lion's
noise to manufacture the man's), the drifted pursuit variant, and the
Monte Carlo probes for near-collision ("shyness" refutation) and for
the small-noise limit toward deterministic greedy pursuit.

Strategy catalogue:

  synchronous      J = I, K = 0.  Difference frozen until a reflection.
  mirror           J = I - 2 u u^T (Householder across the midline),
                   K = 0.  Separation diffuses along the line joining
                   the pair.
  independent      J = 0, K = I.  Fresh noise for the man.
  perverse_radial  J = I - 2 w w^T with w the 90-degree rotation of u,
                   K = 0.  Radial increments agree, so the separation
                   has no radial diffusion and |X - Y| creeps outward
                   at a deterministic rate while both stay interior.
                   This is an interpretation of a known adversarial
                   coupling and is flagged as such in reports.
  custom_rotation  J = R(theta), K = 0.

All five satisfy J^T J + K^T K = I exactly up to rounding, which keeps
each marginal an honest reflected random walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PointOutsideDomain, ScenarioError, StepTooLarge
from .geometry import (
    TAU_GEOM,
    Mode,
    PolygonalDomain,
    boundary_clearance,
    contains,
    points_inside,
    project_points,
    project_to_closure,
)
from .metric import (
    SeparationEvaluator,
    intrinsic_diameter,
    intrinsic_distance,
    separation_and_direction,
)
from .rng import STREAM_A, STREAM_B, BrownianDriver
from .verify import CheckReport, _verdict

_EYE2 = np.eye(2)

IDENTITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# coupling steps and strategies


@dataclass(frozen=True)
class CouplingStep:
    """One predictable matrix pair: the man's increment is J^T dB + K^T dA."""

    J: np.ndarray
    K: np.ndarray

    def identity_defect(self) -> float:
        """Max-norm distance of J^T J + K^T K from the identity."""
        g = self.J.T @ self.J + self.K.T @ self.K
        return float(np.abs(g - _EYE2).max())


def _unit_diff(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Unit vectors (X-Y)/|X-Y| row-wise, e1 where the pair coincides."""
    d = X - Y
    n = np.hypot(d[:, 0], d[:, 1])
    ok = n > 1e-14
    u = np.zeros_like(d)
    u[ok] = d[ok] / n[ok, None]
    u[~ok, 0] = 1.0
    return u


class CouplingStrategy:
    """Maps the current pair state to a CouplingStep, batched over trials."""

    kind: str = "?"

    def __init__(self):
        self.params: dict = {}

    def matrices(self, X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(J, K) with shape (m, 2, 2) for states X, Y of shape (m, 2)."""
        raise NotImplementedError

    def step(self, x, y) -> CouplingStep:
        J, K = self.matrices(np.asarray(x, float)[None, :], np.asarray(y, float)[None, :])
        return CouplingStep(J=J[0], K=K[0])

    def man_noise(self, X: np.ndarray, Y: np.ndarray, dB: np.ndarray, dA: np.ndarray) -> np.ndarray:
        """Row-wise J^T dB + K^T dA; strategies override with closed forms."""
        J, K = self.matrices(X, Y)
        return np.einsum("mji,mj->mi", J, dB) + np.einsum("mji,mj->mi", K, dA)


class Synchronous(CouplingStrategy):
    kind = "synchronous"

    def matrices(self, X, Y):
        m = len(X)
        return np.broadcast_to(_EYE2, (m, 2, 2)), np.zeros((m, 2, 2))

    def man_noise(self, X, Y, dB, dA):
        return dB


class Mirror(CouplingStrategy):
    """Householder reflection across the perpendicular bisector direction."""

    kind = "mirror"

    def matrices(self, X, Y):
        u = _unit_diff(X, Y)
        J = _EYE2[None, :, :] - 2.0 * u[:, :, None] * u[:, None, :]
        return J, np.zeros((len(X), 2, 2))

    def man_noise(self, X, Y, dB, dA):
        u = _unit_diff(X, Y)
        s = dB[:, 0] * u[:, 0] + dB[:, 1] * u[:, 1]
        return dB - (2.0 * s)[:, None] * u


class Independent(CouplingStrategy):
    kind = "independent"

    def matrices(self, X, Y):
        m = len(X)
        return np.zeros((m, 2, 2)), np.broadcast_to(_EYE2, (m, 2, 2))

    def man_noise(self, X, Y, dB, dA):
        return dA


class PerverseRadial(CouplingStrategy):
    """Reflection across the separation axis: radial noise cancels in X-Y.

    The separation then picks up only tangential wobble, which pushes
    |X-Y| outward at a deterministic rate between reflections.  Reports
    carry an interpretation flag because the adversarial construction
    this mimics is stated elsewhere only by its qualitative behavior.
    """

    kind = "perverse_radial"
    interpretation = (
        "radial reflection: J = I - 2 w w^T with w perpendicular to X-Y; "
        "separation grows deterministically while both points are interior"
    )

    def matrices(self, X, Y):
        u = _unit_diff(X, Y)
        w = np.stack([-u[:, 1], u[:, 0]], axis=1)
        J = _EYE2[None, :, :] - 2.0 * w[:, :, None] * w[:, None, :]
        return J, np.zeros((len(X), 2, 2))

    def man_noise(self, X, Y, dB, dA):
        u = _unit_diff(X, Y)
        sw = -dB[:, 0] * u[:, 1] + dB[:, 1] * u[:, 0]
        out = dB.copy()
        out[:, 0] += 2.0 * sw * u[:, 1]
        out[:, 1] -= 2.0 * sw * u[:, 0]
        return out


class CustomRotation(CouplingStrategy):
    kind = "custom_rotation"

    def __init__(self, theta: float):
        super().__init__()
        self.theta = float(theta)
        self.params = {"theta": self.theta}
        c, s = math.cos(self.theta), math.sin(self.theta)
        self._J = np.array([[c, -s], [s, c]])

    def matrices(self, X, Y):
        m = len(X)
        return np.broadcast_to(self._J, (m, 2, 2)), np.zeros((m, 2, 2))

    def man_noise(self, X, Y, dB, dA):
        return dB @ self._J


COUPLING_KINDS = ("synchronous", "mirror", "independent", "perverse_radial", "custom_rotation")


def coupling_strategy(kind: str, **params) -> CouplingStrategy:
    """Instantiate a coupling strategy by name."""
    if kind == "synchronous":
        return Synchronous()
    if kind == "mirror":
        return Mirror()
    if kind == "independent":
        return Independent()
    if kind == "perverse_radial":
        return PerverseRadial()
    if kind == "custom_rotation":
        if "theta" not in params:
            raise ScenarioError("custom_rotation needs a theta parameter")
        return CustomRotation(params["theta"])
    raise ScenarioError(f"unknown coupling strategy {kind!r}; known: {COUPLING_KINDS}")


# ---------------------------------------------------------------------------
# projection scheme


def _project_sub(domain: PolygonalDomain, pos: np.ndarray, delta: np.ndarray, mode: Mode):
    """Projected step with subdivision, batched over rows.

    Steps of free length >= r/2 are split into ceil(|delta|/(r/4)) equal
    pieces, each projected.  Returns (new positions, local-time increments
    = summed projection displacements)."""
    r = domain.rounding_radius
    lens = np.hypot(delta[:, 0], delta[:, 1])
    parts = np.where(lens >= 0.5 * r, np.ceil(lens / (0.25 * r)), 1.0).astype(np.int64)
    parts = np.maximum(parts, 1)
    add = np.zeros(len(pos))
    if int(parts.max()) == 1:
        free = pos + delta
        proj = project_points(domain, free, mode)
        diff = free - proj
        return proj, np.hypot(diff[:, 0], diff[:, 1])
    sub = delta / parts[:, None]
    cur = pos.copy()
    for k in range(int(parts.max())):
        act = k < parts
        free = cur.copy()
        free[act] += sub[act]
        proj = project_points(domain, free, mode)
        diff = free - proj
        add += np.hypot(diff[:, 0], diff[:, 1])
        cur = proj
    return cur, add


def _require_closure(domain, p, mode, what):
    if contains(domain, p, mode) == "exterior":
        raise PointOutsideDomain(f"{what} {np.asarray(p, float).tolist()} outside the {mode} closure")


def _check_noise_dt(domain: PolygonalDomain, dt: float):
    r = domain.rounding_radius
    if dt > (r / 8.0) ** 2 * (1.0 + 1e-12):
        raise StepTooLarge(
            f"dt={dt} too coarse for the reflection scheme; need dt <= (r/8)^2 = {(r / 8.0) ** 2}"
        )


# ---------------------------------------------------------------------------
# reflected Brownian motion


@dataclass
class ReflectedPath:
    """Discrete reflected random walk with its boundary local-time proxy."""

    dt: float
    mode: Mode
    seed: int
    stream: int
    points: np.ndarray
    local_time: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.points) - 1


def reflected_bm(
    domain: PolygonalDomain,
    x0,
    driver: BrownianDriver,
    steps: int,
    stream: int = STREAM_B,
    mode: Mode = "rounded",
) -> ReflectedPath:
    """Project-after-increment reflected walk driven by one noise stream.

    While the walk stays interior the positions are exactly the partial
    sums of the increments (the projection is the identity there), so
    the local time stays at zero until the first boundary contact.
    """
    x0 = np.asarray(x0, dtype=float)
    _require_closure(domain, x0, mode, "start")
    _check_noise_dt(domain, driver.dt)
    r = domain.rounding_radius

    pts = np.empty((steps + 1, 2))
    loc = np.empty(steps + 1)
    pts[0] = x0
    loc[0] = 0.0

    base = x0.copy()  # anchor of the current free stretch
    acc = np.zeros(2)  # summed increments since the anchor
    k = 0
    block = 4096
    while k < steps:
        n = min(block, steps - k)
        inc = driver.increments(stream, k, n)
        lens = np.hypot(inc[:, 0], inc[:, 1])
        free = base + acc + np.cumsum(inc, axis=0)
        if bool(points_inside(domain, free, mode).all()) and bool((lens < 0.5 * r).all()):
            pts[k + 1 : k + 1 + n] = free
            loc[k + 1 : k + 1 + n] = loc[k]
            acc = acc + inc.sum(axis=0)
            k += n
            continue
        # boundary (or an oversized hop) somewhere in the block: walk it
        # one step at a time with the subdivided projection
        cur = base + acc
        for j in range(n):
            new, add = _project_sub(domain, cur[None, :], inc[j][None, :], mode)
            cur = new[0]
            pts[k + 1] = cur
            loc[k + 1] = loc[k] + float(add[0])
            k += 1
        base = cur.copy()
        acc = np.zeros(2)
    return ReflectedPath(dt=driver.dt, mode=mode, seed=driver.seed, stream=stream, points=pts, local_time=loc)


# ---------------------------------------------------------------------------
# coupled simulation


@dataclass
class CoupledTrace:
    """Sampled coupled pair with local times; distances computed on demand."""

    dt: float
    mode: Mode
    strategy_kind: str
    drift_n: float
    seed: int
    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    LX: np.ndarray
    LY: np.ndarray
    _d_intr: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_samples(self) -> int:
        return len(self.t)

    def euclidean_separation(self) -> np.ndarray:
        d = self.X - self.Y
        return np.hypot(d[:, 0], d[:, 1])

    def intrinsic_separation(self, domain: PolygonalDomain) -> np.ndarray:
        if self._d_intr is None:
            vals = np.array(
                [intrinsic_distance(domain, self.X[i], self.Y[i], self.mode) for i in range(len(self.t))]
            )
            self._d_intr = vals
        return self._d_intr

    def csv_rows(self, domain: PolygonalDomain):
        """t,X1,X2,Y1,Y2,d_intr,d_eucl,LX,LY per sample."""
        d_intr = self.intrinsic_separation(domain)
        d_eucl = self.euclidean_separation()
        for i in range(len(self.t)):
            yield (
                self.t[i],
                self.X[i, 0],
                self.X[i, 1],
                self.Y[i, 0],
                self.Y[i, 1],
                d_intr[i],
                d_eucl[i],
                self.LX[i],
                self.LY[i],
            )


def simulate_coupled(
    domain: PolygonalDomain,
    x0,
    y0,
    strategy: CouplingStrategy,
    driver: BrownianDriver,
    drift_n: float = 0.0,
    steps: int = 1000,
    mode: Mode = "rounded",
) -> CoupledTrace:
    """Run the coupled pair, optionally with the pursuit drift of size n.

    Per step the lion gets dB + n chi dt and the man J^T dB + K^T dA +
    n J^T chi dt, each followed by the subdivided projection.  The drift
    is dropped for a step whenever the pair is within tau_geom, where
    the chasing direction stops being meaningful.
    """
    x = np.asarray(x0, dtype=float).copy()
    y = np.asarray(y0, dtype=float).copy()
    _require_closure(domain, x, mode, "Lion start")
    _require_closure(domain, y, mode, "Man start")
    _check_noise_dt(domain, driver.dt)
    if drift_n < 0.0:
        raise ScenarioError(f"drift_n must be nonnegative, got {drift_n}")
    dt = driver.dt
    r = domain.rounding_radius
    if drift_n > 0.0 and drift_n * dt > r / 8.0 * (1.0 + 1e-12):
        raise StepTooLarge(f"drift step n*dt = {drift_n * dt} exceeds r/8 = {r / 8.0}")
    tau = TAU_GEOM * domain._scale

    X = np.empty((steps + 1, 2))
    Y = np.empty((steps + 1, 2))
    LX = np.empty(steps + 1)
    LY = np.empty(steps + 1)
    X[0], Y[0] = x, y
    LX[0] = LY[0] = 0.0

    block = 4096
    k = 0
    while k < steps:
        n = min(block, steps - k)
        dB = driver.increments(STREAM_B, k, n)
        dA = driver.increments(STREAM_A, k, n)
        for j in range(n):
            J, K = strategy.matrices(x[None, :], y[None, :])
            Jm, Km = J[0], K[0]
            if drift_n > 0.0:
                d, u = separation_and_direction(domain, x, y, mode)
                drift = drift_n * dt * u if (u is not None and d > tau) else np.zeros(2)
            else:
                drift = np.zeros(2)
            xd = dB[j] + drift
            yd = Jm.T @ dB[j] + Km.T @ dA[j] + Jm.T @ drift
            nx, ax = _project_sub(domain, x[None, :], xd[None, :], mode)
            ny, ay = _project_sub(domain, y[None, :], yd[None, :], mode)
            x, y = nx[0], ny[0]
            X[k + 1], Y[k + 1] = x, y
            LX[k + 1] = LX[k] + float(ax[0])
            LY[k + 1] = LY[k] + float(ay[0])
            k += 1
    return CoupledTrace(
        dt=dt,
        mode=mode,
        strategy_kind=strategy.kind,
        drift_n=float(drift_n),
        seed=driver.seed,
        t=dt * np.arange(steps + 1),
        X=X,
        Y=Y,
        LX=LX,
        LY=LY,
    )


# ---------------------------------------------------------------------------
# shyness probe


def default_start_pair(domain: PolygonalDomain, mode: Mode = "rounded") -> tuple[np.ndarray, np.ndarray]:
    """Deterministic well-separated starting pair: the farthest vertex pair
    pulled toward each other until both points clear the boundary."""
    V = domain.verts
    D2 = ((V[:, None, :] - V[None, :, :]) ** 2).sum(axis=2)
    i, j = np.unravel_index(int(D2.argmax()), D2.shape)
    a, b = V[i], V[j]
    for f in (0.075, 0.1, 0.125, 0.15, 0.2, 0.25, 0.3):
        p = a + f * (b - a)
        q = b + f * (a - b)
        if contains(domain, p, mode) == "interior" and contains(domain, q, mode) == "interior":
            return p, q
    raise ScenarioError("could not place a default start pair inside the domain")


@dataclass
class ShynessReport:
    """Monte Carlo near-collision counts for one coupling strategy."""

    strategy_kind: str
    epsilon: float
    t1: float
    dt: float
    trials: int
    windows: int
    base_seed: int
    mode: Mode
    hits: int
    hit_fraction: float
    window_hits: list[int]
    window_hit_fractions: list[float]
    survival_by_window: list[float]
    geometric_rate: float
    min_intrinsic: np.ndarray
    min_euclidean: np.ndarray
    window_min: np.ndarray  # (trials, windows) per-trial per-window minima
    start: tuple
    interpretation: str | None = None

    def summary(self) -> dict:
        q = np.quantile(self.min_intrinsic, [0.0, 0.25, 0.5, 0.75, 1.0])
        return {
            "min": float(q[0]),
            "q25": float(q[1]),
            "median": float(q[2]),
            "q75": float(q[3]),
            "max": float(q[4]),
        }

    def to_json_dict(self) -> dict:
        out = {
            "strategy": self.strategy_kind,
            "epsilon": self.epsilon,
            "t1": self.t1,
            "dt": self.dt,
            "trials": self.trials,
            "windows": self.windows,
            "base_seed": self.base_seed,
            "mode": self.mode,
            "hits": self.hits,
            "hit_fraction": self.hit_fraction,
            "window_hits": list(self.window_hits),
            "window_hit_fractions": [float(v) for v in self.window_hit_fractions],
            "survival_by_window": [float(v) for v in self.survival_by_window],
            "geometric_rate": self.geometric_rate,
            "min_intrinsic_summary": self.summary(),
            "min_intrinsic": [float(v) for v in self.min_intrinsic],
            "min_euclidean": [float(v) for v in self.min_euclidean],
            "window_min_floor": [float(v) for v in self.window_min.min(axis=0)],
            "start": [list(map(float, p)) for p in self.start],
        }
        if self.interpretation:
            out["interpretation"] = self.interpretation
        return out


def shyness_probe_suite(
    domain: PolygonalDomain,
    strategies,
    epsilon: float,
    t1: float | None = None,
    trials: int = 200,
    base_seed: int = 0,
    dt: float | None = None,
    windows: int = 1,
    x0=None,
    y0=None,
    mode: Mode = "rounded",
) -> list[ShynessReport]:
    """Run shyness probes for several strategies over shared noise.

    Trial i of every strategy is driven by seed base_seed+i, exactly as a
    standalone probe would be, so each report is identical to running
    shyness_probe for that strategy alone; batching them here just shares
    the increment generation and the (stacked) projection work.

    Intrinsic separation is evaluated lazily.  On a convex domain it equals
    the Euclidean distance, so the minima are exact and free.  Otherwise a
    trial's per-window minimum can only improve on steps where the
    Euclidean gap undercuts it (Euclidean never exceeds intrinsic); those
    steps pass through a cheap batched estimate to a certified scalar
    recomputation whenever the gap is within 1.25 epsilon of a dip, and on
    a fixed subsample of steps farther out.  Refinement stops for a window
    once its minimum is certified at or below epsilon.  Consequently hits
    are exact, minima at or below epsilon are certified upper bounds, and
    minima well above epsilon are sampled estimates.
    """
    strategies = list(strategies)
    if not strategies:
        raise ScenarioError("need at least one strategy")
    if epsilon <= 0.0:
        raise ScenarioError("epsilon must be positive")
    if trials < 1:
        raise ScenarioError("need at least one trial")
    if windows < 1:
        raise ScenarioError("need at least one window")
    if t1 is None:
        t1 = 10.0 * intrinsic_diameter(domain, mode=mode) ** 2
    r = domain.rounding_radius
    if dt is None:
        dt = (r / 8.0) ** 2
    _check_noise_dt(domain, dt)
    if x0 is None or y0 is None:
        dx0, dy0 = default_start_pair(domain, mode)
        x0 = dx0 if x0 is None else np.asarray(x0, float)
        y0 = dy0 if y0 is None else np.asarray(y0, float)
    else:
        x0 = np.asarray(x0, float)
        y0 = np.asarray(y0, float)
    _require_closure(domain, x0, mode, "Lion start")
    _require_closure(domain, y0, mode, "Man start")

    m = trials
    S = len(strategies)
    steps_per_window = int(math.ceil(t1 / dt - 1e-9))
    total = windows * steps_per_window
    drivers = [BrownianDriver(base_seed + i, dt) for i in range(m)]
    evaluator = SeparationEvaluator(domain, mode)

    # state rows: strategy s occupies [s*m, (s+1)*m); X block then Y block
    P = np.empty((2 * S * m, 2))
    P[: S * m] = x0
    P[S * m :] = y0
    win_min = np.full((S, m, windows), np.inf)
    min_eucl = np.full((S, m), np.hypot(*(x0 - y0)))
    d0 = intrinsic_distance(domain, x0, y0, mode)
    win_min[:, :, 0] = d0
    sep_floor = epsilon * (1.0 - 1e-12)
    convex = len(domain.reflex_indices) == 0
    zone = 1.25 * epsilon
    refine_every = 16

    deltas = np.empty_like(P)
    # distance budget per row before the membership test must rerun; the
    # projection is the identity on rows that provably stayed interior,
    # so spending the budget instead is bitwise-equivalent and much cheaper
    clearance = boundary_clearance(domain, P, mode)
    block = 1024
    k = 0
    while k < total:
        n = min(block, total - k)
        dB = np.stack([drv.increments(STREAM_B, k, n) for drv in drivers], axis=0)
        dA = np.stack([drv.increments(STREAM_A, k, n) for drv in drivers], axis=0)
        for j in range(n):
            for s, strat in enumerate(strategies):
                X = P[s * m : (s + 1) * m]
                Y = P[S * m + s * m : S * m + (s + 1) * m]
                deltas[s * m : (s + 1) * m] = dB[:, j]
                deltas[S * m + s * m : S * m + (s + 1) * m] = strat.man_noise(X, Y, dB[:, j], dA[:, j])
            step_len = np.hypot(deltas[:, 0], deltas[:, 1])
            # rows at risk of touching the boundary, plus rows long enough
            # to need subdivision (whose arithmetic must not be shortcut)
            rows_p = np.nonzero((clearance <= step_len) | (step_len >= 0.5 * r))[0]
            orig = P[rows_p]
            dsub = deltas[rows_p]
            P += deltas
            clearance -= step_len
            if rows_p.size:
                proj, _ = _project_sub(domain, orig, dsub, mode)
                P[rows_p] = proj
                clearance[rows_p] = boundary_clearance(domain, proj, mode)
            w = min(int((k + j + 1) * dt / t1), windows - 1)
            diff = P[: S * m] - P[S * m :]
            d_e = np.hypot(diff[:, 0], diff[:, 1]).reshape(S, m)
            np.minimum(min_eucl, d_e, out=min_eucl)
            wm = win_min[:, :, w]
            if convex:
                np.minimum(wm, d_e, out=wm)
                continue
            gate = (d_e < wm) & (wm > sep_floor)
            if (k + j) % refine_every:
                gate &= d_e <= zone
            cand = np.nonzero(gate)
            if len(cand[0]):
                rows = cand[0] * m + cand[1]
                cheap = evaluator.distances(P[rows], P[S * m + rows])
                for s, i, row, ch in zip(cand[0], cand[1], rows, cheap):
                    if ch >= win_min[s, i, w]:
                        continue
                    val = intrinsic_distance(domain, P[row], P[S * m + row], mode)
                    if val < win_min[s, i, w]:
                        win_min[s, i, w] = val
        k += n

    return [
        _report_from_minima(
            strat.kind,
            getattr(strat, "interpretation", None),
            win_min[s],
            min_eucl[s].copy(),
            epsilon,
            t1,
            dt,
            base_seed,
            mode,
            (tuple(x0), tuple(y0)),
        )
        for s, strat in enumerate(strategies)
    ]


def _report_from_minima(
    strategy_kind: str,
    interpretation: str | None,
    win_mat: np.ndarray,
    min_eucl: np.ndarray,
    epsilon: float,
    t1: float,
    dt: float,
    base_seed: int,
    mode: Mode,
    start: tuple,
) -> ShynessReport:
    m, windows = win_mat.shape
    hit_mat = win_mat <= epsilon
    window_hits = hit_mat.sum(axis=0).astype(int).tolist()
    hits = int(window_hits[0])
    survived = np.ones(m, dtype=bool)
    survival = []
    for w in range(windows):
        survived &= ~hit_mat[:, w]
        survival.append(float(survived.mean()))
    rate = float("nan")
    pos = [(w, sv) for w, sv in enumerate(survival) if sv > 0.0]
    if len(pos) >= 2:
        ks = np.array([p[0] for p in pos], dtype=float)
        ls = np.log(np.array([p[1] for p in pos]))
        rate = float(-np.polyfit(ks, ls, 1)[0])
    elif survival[0] == 0.0:
        rate = float("inf")
    return ShynessReport(
        strategy_kind=strategy_kind,
        epsilon=float(epsilon),
        t1=float(t1),
        dt=float(dt),
        trials=m,
        windows=windows,
        base_seed=int(base_seed),
        mode=mode,
        hits=hits,
        hit_fraction=hits / m,
        window_hits=window_hits,
        window_hit_fractions=[h / m for h in window_hits],
        survival_by_window=survival,
        geometric_rate=rate,
        min_intrinsic=win_mat.min(axis=1),
        min_euclidean=min_eucl,
        window_min=win_mat,
        start=start,
        interpretation=interpretation,
    )


def merge_shyness_reports(parts: list[ShynessReport]) -> ShynessReport:
    """Combine probe reports over disjoint trial ranges of one experiment.

    Parts must agree on everything but base_seed and trial count; part k
    is expected to cover seeds starting where part k-1 stopped, which is
    what the trial fan-out produces.  Counts, minima and survival are all
    order-independent reductions, so the merge equals the single-shot run.
    """
    if not parts:
        raise ScenarioError("nothing to merge")
    first = parts[0]
    for p in parts[1:]:
        same = (
            p.strategy_kind == first.strategy_kind
            and p.epsilon == first.epsilon
            and p.t1 == first.t1
            and p.dt == first.dt
            and p.windows == first.windows
            and p.mode == first.mode
            and p.start == first.start
        )
        if not same:
            raise ScenarioError("cannot merge probe reports with different parameters")
    if len(parts) == 1:
        return first
    return _report_from_minima(
        first.strategy_kind,
        first.interpretation,
        np.vstack([p.window_min for p in parts]),
        np.concatenate([p.min_euclidean for p in parts]),
        first.epsilon,
        first.t1,
        first.dt,
        min(p.base_seed for p in parts),
        first.mode,
        first.start,
    )


def shyness_probe(
    domain: PolygonalDomain,
    strategy: CouplingStrategy,
    epsilon: float,
    t1: float | None = None,
    trials: int = 200,
    base_seed: int = 0,
    dt: float | None = None,
    windows: int = 1,
    x0=None,
    y0=None,
    mode: Mode = "rounded",
) -> ShynessReport:
    """Count trials whose intrinsic separation dips to <= epsilon by t1.

    Trial i is driven by seed base_seed+i.  The horizon is windows * t1
    and a dip is credited to the window containing its time, so the
    report also carries per-window hit rates and the geometric decay fit
    of the survival fractions.  See shyness_probe_suite for the lazy
    evaluation strategy.
    """
    return shyness_probe_suite(
        domain,
        [strategy],
        epsilon,
        t1=t1,
        trials=trials,
        base_seed=base_seed,
        dt=dt,
        windows=windows,
        x0=x0,
        y0=y0,
        mode=mode,
    )[0]


# ---------------------------------------------------------------------------
# rescaled small-noise limit


def rescaled_convergence_experiment(
    domain: PolygonalDomain,
    x0,
    y0,
    strategy: CouplingStrategy,
    n_list,
    t_horizon: float,
    seed: int = 0,
    dt: float | None = None,
    mode: Mode = "rounded",
) -> CheckReport:
    """Deviation of the rescaled drifted pair from deterministic pursuit.

    For each n the pair moves with unit drift chi and noise of variance
    dt/n, sharing one increment sequence across the whole list.  The
    comparator re-runs plain greedy pursuit against the realized man
    path on the same grid, and the reported deviation is the largest
    intrinsic distance between the two lions.  Passing means the
    deviations shrink as n grows, with at most one inversion and that
    one within 10 percent.
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    _require_closure(domain, x0, mode, "Lion start")
    _require_closure(domain, y0, mode, "Man start")
    n_list = [float(v) for v in n_list]
    if len(n_list) < 2 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ScenarioError("n_list must be increasing with at least two entries")
    r = domain.rounding_radius
    if dt is None:
        dt = (r / 8.0) ** 2
    _check_noise_dt(domain, dt)
    if t_horizon <= 0.0:
        raise ScenarioError("t_horizon must be positive")
    steps = int(math.ceil(t_horizon / dt - 1e-9))
    driver = BrownianDriver(seed, dt)
    tau = TAU_GEOM * domain._scale

    diam = intrinsic_diameter(domain, mode=mode)
    floor = 1e-15 * max(1.0, diam)
    table = {}
    devs = []
    for n in n_list:
        scale = 1.0 / math.sqrt(n)
        x = x0.copy()
        y = y0.copy()
        xd = x0.copy()  # deterministic comparator lion
        sup_intr = 0.0
        sup_eucl = 0.0
        noise_sum = 0.0
        k = 0
        block = 4096
        while k < steps:
            nn = min(block, steps - k)
            dB = driver.increments(STREAM_B, k, nn) * scale
            dA = driver.increments(STREAM_A, k, nn) * scale
            for j in range(nn):
                J, K = strategy.matrices(x[None, :], y[None, :])
                Jm, Km = J[0], K[0]
                d, u = separation_and_direction(domain, x, y, mode)
                drift = dt * u if (u is not None and d > tau) else np.zeros(2)
                dd, ud = separation_and_direction(domain, xd, y, mode)
                drift_det = dt * ud if (ud is not None and dd > tau) else np.zeros(2)
                xs = dB[j] + drift
                ys = Jm.T @ dB[j] + Km.T @ dA[j] + Jm.T @ drift
                noise_sum += float(np.hypot(*dB[j]))
                nx, _ = _project_sub(domain, x[None, :], xs[None, :], mode)
                ny, _ = _project_sub(domain, y[None, :], ys[None, :], mode)
                nxd, _ = _project_sub(domain, xd[None, :], drift_det[None, :], mode)
                x, y, xd = nx[0], ny[0], nxd[0]
                sup_intr = max(sup_intr, intrinsic_distance(domain, x, xd, mode))
                sup_eucl = max(sup_eucl, float(np.hypot(*(x - xd))))
                k += 1
        devs.append(sup_intr)
        table[f"{n:g}"] = {
            "sup_intrinsic": sup_intr,
            "sup_euclidean": sup_eucl,
            "mean_noise_step": noise_sum / max(steps, 1),
            "drift_step": dt,
        }

    ratios = []
    for a, b in zip(devs, devs[1:]):
        ratios.append(b / max(a, floor))
    inversions = [q for q in ratios if q > 1.0 + 1e-12]
    if len(inversions) <= 1:
        margin = 1.1 - max(ratios)
    else:
        margin = 1.0 - sorted(inversions)[-2]
    details = {
        "deviations": table,
        "n_list": n_list,
        "ratios": ratios,
        "inversions": len(inversions),
        "t_horizon": t_horizon,
        "dt": dt,
        "steps": steps,
        "seed": seed,
        "strategy": strategy.kind,
    }
    return _verdict("rescaled-convergence", margin, details)


# ---------------------------------------------------------------------------
# path regularity checks


def intrinsic_lip1_check(
    path,
    domain: PolygonalDomain,
    dt: float,
    c_lip: float | None = None,
    max_pairs: int = 1500,
    mode: Mode = "rounded",
) -> CheckReport:
    """Intrinsic Lip(1) ratio of a projected unit-speed (drift-only) path.

    Samples pairs at geometrically spaced lags and certifies
    d_intr(Z_s, Z_t) <= (t - s) * (1 + c_lip * dt) at each.
    """
    pts = np.asarray(getattr(path, "points", path), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ScenarioError("need a path of at least two planar samples")
    r = domain.rounding_radius
    if c_lip is None:
        c_lip = 1.0 / (8.0 * r * r)
    allowed = 1.0 + c_lip * dt
    n = len(pts)
    lags = []
    lag = 1
    while lag < n:
        lags.append(lag)
        lag *= 2
    if (n - 1) not in lags:
        lags.append(n - 1)
    per_lag = max(1, max_pairs // len(lags))
    worst = 0.0
    worst_pair = (0, 0)
    n_pairs = 0
    for lag in lags:
        idx = np.unique(np.linspace(0, n - 1 - lag, min(per_lag, n - lag)).astype(int))
        for i in idx:
            d = intrinsic_distance(domain, pts[i], pts[i + lag], mode)
            ratio = d / (lag * dt)
            n_pairs += 1
            if ratio > worst:
                worst = ratio
                worst_pair = (int(i), int(i + lag))
    details = {
        "max_ratio": worst,
        "allowed": allowed,
        "c_lip": c_lip,
        "dt": dt,
        "n_pairs": n_pairs,
        "worst_pair": worst_pair,
    }
    return _verdict("intrinsic-lip1", allowed - worst, details)


def projected_step_check(
    domain: PolygonalDomain,
    trials: int = 10000,
    seed: int = 0,
    mode: Mode = "rounded",
) -> CheckReport:
    """Single projected steps never stretch beyond a(1 + a^2/(8 r^2)).

    Random interior starts, random directions, free lengths up to r/2
    (the subdivision threshold), displaced length measured intrinsically."""
    rng = np.random.default_rng(seed)
    r = domain.rounding_radius
    tau = TAU_GEOM * domain._scale
    lo = domain.verts.min(axis=0)
    hi = domain.verts.max(axis=0)

    starts = np.empty((trials, 2))
    got = 0
    while got < trials:
        cand = rng.uniform(lo, hi, size=(4 * (trials - got), 2))
        ok = cand[points_inside(domain, cand, mode)]
        take = min(len(ok), trials - got)
        starts[got : got + take] = ok[:take]
        got += take
    a = r * rng.uniform(0.05, 0.5, size=trials)
    th = rng.uniform(0.0, 2.0 * math.pi, size=trials)
    deltas = a[:, None] * np.stack([np.cos(th), np.sin(th)], axis=1)

    worst_margin = np.inf
    worst = {}
    for i in range(trials):
        free = starts[i] + deltas[i]
        proj = project_to_closure(domain, free, mode).point
        d = intrinsic_distance(domain, starts[i], proj, mode)
        bound = a[i] * (1.0 + a[i] * a[i] / (8.0 * r * r)) + tau
        mrg = bound - d
        if mrg < worst_margin:
            worst_margin = mrg
            worst = {
                "a": float(a[i]),
                "measured": float(d),
                "bound": float(bound),
                "start": starts[i].tolist(),
            }
    details = {"trials": trials, "seed": seed, "worst": worst}
    return _verdict("projected-step-bound", float(worst_margin), details)


# ---------------------------------------------------------------------------
# marginal-preservation checks


def coupling_identity_check(
    strategy: CouplingStrategy,
    domain: PolygonalDomain,
    n_states: int = 10_000,
    seed: int = 0,
    mode: Mode = "rounded",
    tol: float = IDENTITY_TOL,
) -> CheckReport:
    """max over random interior pair states of ||J^T J + K^T K - I||_max."""
    from .verify import sample_interior_points

    pts = sample_interior_points(domain, 2 * n_states, seed, mode)
    X, Y = pts[:n_states], pts[n_states:]
    J, K = strategy.matrices(X, Y)
    G = np.einsum("mki,mkj->mij", J, J) + np.einsum("mki,mkj->mij", K, K)
    G -= _EYE2[None, :, :]
    defect = float(np.abs(G).max())
    details = {
        "strategy": strategy.kind,
        "n_states": n_states,
        "seed": seed,
        "max_defect": defect,
        "tol": tol,
    }
    return _verdict("coupling-identity", tol - defect, details)


def noise_covariance_check(
    strategy: CouplingStrategy,
    domain: PolygonalDomain,
    n_steps: int = 100_000,
    seed: int = 0,
    dt: float | None = None,
    mode: Mode = "rounded",
    rel_tol: float = 0.05,
) -> CheckReport:
    """Sample covariance of the man's combined noise stays within
    rel_tol of dt * I entrywise, with the pair state redrawn every step so
    the state-dependent strategies are exercised away from one geometry."""
    from .verify import sample_interior_points

    if dt is None:
        dt = (domain.rounding_radius / 8.0) ** 2
    _check_noise_dt(domain, dt)
    pts = sample_interior_points(domain, 2 * n_steps, seed, mode)
    X, Y = pts[:n_steps], pts[n_steps:]
    driver = BrownianDriver(seed, dt)
    dB = driver.increments(STREAM_B, 0, n_steps)
    dA = driver.increments(STREAM_A, 0, n_steps)
    combined = strategy.man_noise(X, Y, dB, dA)
    cov_man = combined.T @ combined / n_steps
    cov_lion = dB.T @ dB / n_steps
    dev = max(
        float(np.abs(cov_man - dt * _EYE2).max()),
        float(np.abs(cov_lion - dt * _EYE2).max()),
    )
    allowed = rel_tol * dt
    details = {
        "strategy": strategy.kind,
        "n_steps": n_steps,
        "dt": dt,
        "seed": seed,
        "cov_man": cov_man,
        "cov_lion": cov_lion,
        "max_abs_deviation": dev,
        "allowed": allowed,
    }
    return _verdict("noise-covariance", allowed - dev, details)
