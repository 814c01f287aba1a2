"""Scenario-driven command line front end.

Subcommands map onto experiments: validate, geodesic, pursue, couple,
probe, rescale, verify.  Every run resolves a scenario (file, then
--set overrides, then explicit flags), validates it up front, executes,
and writes artifacts into the output directory: summary.json always,
a trace CSV when there is a trajectory, plot.svg always.

Exit codes: 0 success, 1 when any verification check FAILs, 2 on input
errors (malformed scenario, violated preconditions, unknown names).

Monte Carlo probe trials fan out across --threads (or the
CAT0_PURSUIT_THREADS variable, 0 meaning auto); per-trial seeds make the
result independent of the fan-out, and everything else is sequential.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .coupling import (
    BrownianDriver,
    coupling_identity_check,
    coupling_strategy,
    default_start_pair,
    merge_shyness_reports,
    noise_covariance_check,
    rescaled_convergence_experiment,
    shyness_probe,
    simulate_coupled,
)
from .errors import Cat0PursuitError, ScenarioError
from .metric import geodesic, intrinsic_diameter
from .pursuit import (
    capture_time_bound,
    curvature_bound_check,
    evader_strategy,
    first_variation_check,
    simulate_pursuit,
    total_curvature,
)
from .report import render_plot, render_rescale_plot, write_csv, write_json
from .scenario import Scenario, apply_overrides, load_scenario  # noqa: F401  (load_scenario is public API)
from .verify import (
    CheckReport,
    cat0_suite,
    chord_suite,
    direction_suite,
    gauss_suite,
    sandwich_suite,
)

TRACE_HEADER = ("t", "x1", "x2", "y1", "y2", "d_intr", "lion_turn")
COUPLED_HEADER = ("t", "X1", "X2", "Y1", "Y2", "d_intr", "d_eucl", "LX", "LY")

# name -> (runner, canonical mode); the estimates pin their own modes, so
# the scenario mode field does not reroute them
_VERIFY_CHECKS = {
    "cat0": lambda dom, seed: cat0_suite(dom, n_triangles=40, grid_n=12, seed=seed, mode="sharp"),
    "gauss": lambda dom, seed: gauss_suite(dom, n_pairs=16, seed=seed, mode="sharp"),
    "sandwich": lambda dom, seed: sandwich_suite(dom, n_pairs=200, seed=seed),
    "direction": lambda dom, seed: direction_suite(dom, n_paths=16, seed=seed),
    "chord": lambda dom, seed: chord_suite(dom, n_paths=16, seed=seed),
}


def _parse_point(s: str) -> list[float]:
    parts = s.split(",")
    if len(parts) != 2:
        raise ScenarioError(f"point {s!r} must be of the form x,y")
    try:
        return [float(parts[0]), float(parts[1])]
    except ValueError:
        raise ScenarioError(f"point {s!r} must be of the form x,y") from None


def _resolve_threads(value: int | None) -> int:
    if value is None:
        env = os.environ.get("CAT0_PURSUIT_THREADS")
        if env is not None:
            try:
                value = int(env)
            except ValueError:
                raise ScenarioError(
                    f"CAT0_PURSUIT_THREADS={env!r} is not an integer"
                ) from None
    if value is None:
        return 1
    if value < 0:
        raise ScenarioError("threads must be >= 0 (0 = auto)")
    return value if value > 0 else (os.cpu_count() or 1)


def _load(args, experiment: str) -> Scenario:
    if args.scenario:
        p = Path(args.scenario)
        try:
            raw = json.loads(p.read_text())
        except FileNotFoundError:
            raise ScenarioError(f"scenario file not found: {p}") from None
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario file {p} is not valid JSON: {exc}") from None
    else:
        raw = {"experiment": experiment}
    if args.set:
        raw = apply_overrides(raw if isinstance(raw, dict) else {}, args.set)
    sc = Scenario.from_json_dict(raw)
    sc = sc.retarget(experiment)
    # an explicit override must not be silently dropped by the retarget
    if args.set:
        kept = sc.to_json_dict()
        for item in args.set:
            root = item.partition("=")[0].split(".")[0]
            if root not in kept:
                raise ScenarioError(
                    f"override {item!r} sets a field the {experiment!r} "
                    "experiment does not use"
                )
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
        sc.validate()
    if args.out is not None:
        sc = replace(sc, out=args.out)
    return sc


def _out_dir(sc: Scenario) -> Path:
    out = Path(sc.out) if sc.out else Path(f"runs/{sc.experiment}-{sc.domain_label}")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _summary(sc: Scenario, payload: dict, checks: list[CheckReport] = ()) -> dict:
    echo = sc.to_json_dict()
    echo.pop("out", None)  # the artifact location must not leak into the artifact
    data = {
        "experiment": sc.experiment,
        "domain": sc.domain_label,
        "mode": sc.mode,
        "seed": sc.seed,
        "scenario": echo,
    }
    data.update(payload)
    if checks:
        data["checks"] = {c.name: c.to_json_dict() for c in checks}
    return data


def _exit_code(checks) -> int:
    return 1 if any(c.applicable and not c.passed for c in checks) else 0


def _start_pair(sc: Scenario, domain) -> tuple[np.ndarray, np.ndarray]:
    if sc.x0 is not None and sc.y0 is not None:
        return np.asarray(sc.x0, float), np.asarray(sc.y0, float)
    dx, dy = default_start_pair(domain, sc.mode)
    x0 = dx if sc.x0 is None else np.asarray(sc.x0, float)
    y0 = dy if sc.y0 is None else np.asarray(sc.y0, float)
    return x0, y0


# ---------------------------------------------------------------------------
# runners


def _cmd_validate(args) -> int:
    sc = _load(args, "validate")
    domain = sc.build_domain()
    out = _out_dir(sc)
    payload = {
        "domain_json": domain.to_json_dict(),
        "domain_report": domain.report.to_json_dict(),
        "derived": {
            "lipschitz": domain.lipschitz,
            "n_arcs": len(domain.arcs()),
            "oracle_feature_size": domain.oracle_feature_size,
            "intrinsic_diameter_sharp": intrinsic_diameter(domain, mode="sharp"),
        },
    }
    write_json(out / "summary.json", _summary(sc, payload))
    render_plot(out / "plot.svg", domain, sc.mode, title=f"domain: {sc.domain_label}")
    return 0


def _cmd_geodesic(args) -> int:
    sc = _load(args, "geodesic")
    domain = sc.build_domain()
    a = _parse_point(args.from_pt) if args.from_pt else sc.x0
    b = _parse_point(args.to_pt) if args.to_pt else sc.y0
    if a is None or b is None:
        raise ScenarioError("geodesic needs --from/--to points or scenario x0/y0")
    path = geodesic(domain, a, b, mode=sc.mode)
    out = _out_dir(sc)
    payload = {"from": list(a), "to": list(b), "geodesic": path.to_json_dict(), "length": path.length}
    write_json(out / "summary.json", _summary(sc, payload))
    ss = np.linspace(0.0, path.length, 513)
    pts = np.array([path.point_at(s) for s in ss])
    render_plot(
        out / "plot.svg",
        domain,
        sc.mode,
        paths=[("geodesic", pts)],
        points=[("from", a, "o"), ("to", b, "s")],
        title=f"geodesic, length {path.length:.6g}",
    )
    return 0


def _pursue_dt_cap(domain, epsilon: float) -> float:
    return min(
        domain.cone_radius / (8.0 * domain.lipschitz),
        domain.rounding_radius / 4.0,
        epsilon / 8.0,
    )


def _cmd_pursue(args) -> int:
    sc = _load(args, "pursue")
    domain = sc.build_domain()
    epsilon = sc.epsilon if sc.epsilon is not None else 0.2
    dt = sc.dt if sc.dt is not None else min(1e-3, _pursue_dt_cap(domain, epsilon))
    x0, y0 = _start_pair(sc, domain)
    spec = dict(sc.evader or {"kind": "run_away"})
    evader = evader_strategy(spec.pop("kind"), **spec)
    diam = intrinsic_diameter(domain, mode=sc.mode)
    bound = capture_time_bound(diam, epsilon)
    t_max = sc.t_max if sc.t_max is not None else bound.t_c
    trace = simulate_pursuit(domain, x0, y0, evader, dt, epsilon, t_max, mode=sc.mode)

    if trace.captured:
        cap = CheckReport(
            "capture_before_bound",
            "PASS" if trace.captured_at <= bound.t_c else "FAIL",
            bound.t_c - trace.captured_at,
            {"captured_at": trace.captured_at, "t_c": bound.t_c},
        )
    elif t_max < bound.t_c:
        cap = CheckReport(
            "capture_before_bound",
            "NOT-APPLICABLE",
            bound.t_c - t_max,
            {"reason": "horizon ended before the capture bound", "t_max": t_max, "t_c": bound.t_c},
        )
    else:
        cap = CheckReport(
            "capture_before_bound",
            "FAIL",
            bound.t_c - t_max,
            {"reason": "no capture by the bound", "t_max": t_max, "t_c": bound.t_c},
        )
    checks = [
        cap,
        first_variation_check(trace, domain),
        curvature_bound_check(trace, epsilon, diam),
    ]

    out = _out_dir(sc)
    write_csv(out / "trace.csv", TRACE_HEADER, trace.csv_rows())
    payload = {
        "captured_at": trace.captured_at,
        "t_c": bound.t_c,
        "tau_total": total_curvature(trace),
        "capture_bound": bound.to_json_dict(),
        "evader": trace.evader_kind,
        "epsilon": epsilon,
        "dt": dt,
        "n_samples": trace.n_samples,
    }
    write_json(out / "summary.json", _summary(sc, payload, checks))
    marks = []
    circles = []
    if trace.captured:
        marks.append(("capture", trace.x[-1], "x"))
        circles.append((trace.x[-1], epsilon / 2.0, "capture radius"))
    render_plot(
        out / "plot.svg",
        domain,
        sc.mode,
        paths=[("lion", trace.x), ("man", trace.y)],
        points=marks,
        circles=circles,
        title=f"pursuit vs {trace.evader_kind}",
    )
    return _exit_code(checks)


def _coupling_from(sc: Scenario):
    spec = dict(sc.coupling or {"kind": "mirror"})
    return coupling_strategy(spec.pop("kind"), **spec)


def _cmd_couple(args) -> int:
    sc = _load(args, "couple")
    domain = sc.build_domain()
    strategy = _coupling_from(sc)
    dt = sc.dt if sc.dt is not None else (domain.rounding_radius / 8.0) ** 2
    t_max = sc.t_max if sc.t_max is not None else 2.0
    drift_n = sc.drift_n if sc.drift_n is not None else 0.0
    x0, y0 = _start_pair(sc, domain)
    steps = int(math.ceil(t_max / dt - 1e-9))
    trace = simulate_coupled(
        domain, x0, y0, strategy, BrownianDriver(sc.seed, dt),
        drift_n=drift_n, steps=steps, mode=sc.mode,
    )
    checks = [
        coupling_identity_check(strategy, domain, n_states=10_000, seed=sc.seed, mode=sc.mode),
        noise_covariance_check(strategy, domain, n_steps=100_000, seed=sc.seed, dt=dt, mode=sc.mode),
    ]
    out = _out_dir(sc)
    write_csv(out / "coupled.csv", COUPLED_HEADER, trace.csv_rows(domain))
    d_intr = trace.intrinsic_separation(domain)
    payload = {
        "strategy": strategy.kind,
        "drift_n": drift_n,
        "dt": dt,
        "steps": steps,
        "final_d_intr": float(d_intr[-1]),
        "min_d_intr": float(d_intr.min()),
        "local_time_X": float(trace.LX[-1]),
        "local_time_Y": float(trace.LY[-1]),
    }
    write_json(out / "summary.json", _summary(sc, payload, checks))
    render_plot(
        out / "plot.svg",
        domain,
        sc.mode,
        paths=[("X", trace.X), ("Y", trace.Y)],
        points=[("X start", x0, "o"), ("Y start", y0, "s")],
        title=f"coupled pair, {strategy.kind}",
    )
    return _exit_code(checks)


def _cmd_probe(args) -> int:
    sc = _load(args, "probe")
    domain = sc.build_domain()
    strategy = _coupling_from(sc)
    epsilon = sc.epsilon if sc.epsilon is not None else 0.2
    dt = sc.dt if sc.dt is not None else (domain.rounding_radius / 8.0) ** 2
    trials = sc.trials if sc.trials is not None else 200
    windows = sc.windows if sc.windows is not None else 5
    t1 = sc.t1 if sc.t1 is not None else 10.0 * intrinsic_diameter(domain, mode=sc.mode) ** 2
    x0, y0 = _start_pair(sc, domain)
    threads = _resolve_threads(args.threads)

    kw = dict(t1=t1, dt=dt, windows=windows, x0=x0, y0=y0, mode=sc.mode)
    if threads <= 1 or trials < 2:
        rep = shyness_probe(domain, strategy, epsilon, trials=trials, base_seed=sc.seed, **kw)
    else:
        n_chunks = min(threads, trials)
        bounds = np.linspace(0, trials, n_chunks + 1).astype(int)

        def run(c: int):
            lo, hi = int(bounds[c]), int(bounds[c + 1])
            return shyness_probe(
                domain, strategy, epsilon, trials=hi - lo, base_seed=sc.seed + lo, **kw
            )

        with ThreadPoolExecutor(max_workers=n_chunks) as ex:
            parts = list(ex.map(run, range(n_chunks)))
        rep = merge_shyness_reports(parts)

    out = _out_dir(sc)
    write_json(out / "probe.json", rep.to_json_dict())
    payload = {
        "strategy": strategy.kind,
        "probe": rep.to_json_dict(),
        "hits_positive": rep.hits >= 1,
        "all_windows_positive": all(h > 0 for h in rep.window_hits),
    }
    write_json(out / "summary.json", _summary(sc, payload))
    render_plot(
        out / "plot.svg",
        domain,
        sc.mode,
        points=[("X start", x0, "o"), ("Y start", y0, "s")],
        circles=[(y0, epsilon, "epsilon")],
        title=f"shyness probe, {strategy.kind}: {rep.hits}/{rep.trials} hits",
    )
    return 0


def _cmd_rescale(args) -> int:
    sc = _load(args, "rescale")
    domain = sc.build_domain()
    strategy = _coupling_from(sc)
    n_list = sc.n_list if sc.n_list is not None else [4, 16, 64, 256]
    t_horizon = sc.t_max if sc.t_max is not None else 2.0
    x0, y0 = _start_pair(sc, domain)
    report = rescaled_convergence_experiment(
        domain, x0, y0, strategy, n_list, t_horizon, seed=sc.seed, dt=sc.dt, mode=sc.mode
    )
    out = _out_dir(sc)
    write_json(out / "deviations.json", report.details)
    write_json(out / "summary.json", _summary(sc, {"strategy": strategy.kind}, [report]))
    devs = [report.details["deviations"][f"{float(n):g}"]["sup_intrinsic"] for n in n_list]
    render_rescale_plot(
        out / "plot.svg", [float(n) for n in n_list], devs,
        title=f"rescaled deviation, {strategy.kind}",
    )
    return _exit_code([report])


def _cmd_verify(args) -> int:
    sc = _load(args, "verify")
    domain = sc.build_domain()
    names = sc.checks if sc.checks is not None else list(_VERIFY_CHECKS)
    unknown = [n for n in names if n not in _VERIFY_CHECKS]
    if unknown:
        raise ScenarioError(
            f"unknown checks {unknown}; known: {sorted(_VERIFY_CHECKS)}"
        )
    checks = [_VERIFY_CHECKS[n](domain, sc.seed) for n in names]
    out = _out_dir(sc)
    write_json(out / "summary.json", _summary(sc, {"check_names": list(names)}, checks))
    render_plot(out / "plot.svg", domain, "rounded", title=f"checks: {sc.domain_label}")
    for c in checks:
        print(f"{c.name}: {c.status} (margin {c.margin:.3e})")
    return _exit_code(checks)


_RUNNERS = {
    "validate": _cmd_validate,
    "geodesic": _cmd_geodesic,
    "pursue": _cmd_pursue,
    "couple": _cmd_couple,
    "probe": _cmd_probe,
    "rescale": _cmd_rescale,
    "verify": _cmd_verify,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="PATH", help="scenario JSON file")
    common.add_argument("--seed", type=int, metavar="U64", help="override the scenario seed")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument(
        "--set",
        action="append",
        metavar="K=V",
        help="dotted-path scenario override, repeatable",
    )
    common.add_argument(
        "--threads",
        type=int,
        metavar="N",
        help="Monte Carlo fan-out width, 0 = auto (env CAT0_PURSUIT_THREADS)",
    )
    parser = argparse.ArgumentParser(
        prog="cat0-pursuit",
        description="pursuit and coupling experiments in planar polygon domains",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name, parents=[common])
        if name == "geodesic":
            p.add_argument("--from", dest="from_pt", metavar="X,Y")
            p.add_argument("--to", dest="to_pt", metavar="X,Y")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _RUNNERS[args.command](args)
    except Cat0PursuitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
