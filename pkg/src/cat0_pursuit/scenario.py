"""Declarative experiment descriptions.

A Scenario pins one experiment end to end: the domain (bundled name or
inline polygon), the boundary mode, the starting points, the strategy
choices and every numeric parameter.  Files are JSON; parse -> serialize
-> parse is the identity on every field, and validation runs up front so
a malformed file fails with the full list of schema errors before any
simulation starts.

Fields that are null or absent mean "derive the default at run time";
the scenario object stores them as None and never serializes them, which
is what keeps the round trip exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .coupling import COUPLING_KINDS
from .domains import BUNDLED_DOMAINS
from .errors import Cat0PursuitError, ScenarioError
from .geometry import PolygonalDomain, contains
from .pursuit import STRATEGY_KINDS

EXPERIMENTS = ("validate", "geodesic", "pursue", "couple", "probe", "rescale", "verify")
MODES = ("sharp", "rounded")

# experiment -> fields it actually reads; anything else present is an error,
# because a typo like "t_max" in a probe scenario should not pass silently
_COMMON = ("experiment", "domain", "mode", "seed", "out")
_USED_BY = {
    "validate": (),
    "geodesic": ("x0", "y0"),
    "pursue": ("x0", "y0", "epsilon", "dt", "t_max", "evader"),
    "couple": ("x0", "y0", "dt", "t_max", "coupling", "drift_n"),
    "probe": ("x0", "y0", "epsilon", "dt", "t1", "trials", "windows", "coupling"),
    "rescale": ("x0", "y0", "dt", "t_max", "n_list", "coupling"),
    "verify": ("checks",),
}


@dataclass(frozen=True)
class Scenario:
    """One experiment description; every field beyond the first is optional.

    Values are kept in JSON-native shapes (lists, dicts, numbers) so that
    serialization reproduces the input byte for byte after key sorting.
    """

    experiment: str
    domain: str | dict = "unit_square"
    mode: str = "rounded"
    seed: int = 0
    out: str | None = None
    x0: list | None = None
    y0: list | None = None
    epsilon: float | None = None
    dt: float | None = None
    t_max: float | None = None
    t1: float | None = None
    trials: int | None = None
    windows: int | None = None
    drift_n: float | None = None
    evader: dict | None = None
    coupling: dict | None = None
    n_list: list | None = None
    checks: list | None = None

    def to_json_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None:
                out[f.name] = v
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a JSON object")
        known = {f.name for f in fields(cls)}
        errors = [f"unknown field {k!r}" for k in sorted(set(data) - known)]
        if "experiment" not in data:
            errors.append("missing required field 'experiment'")
        if errors:
            raise ScenarioError("; ".join(errors))
        sc = cls(**{k: v for k, v in data.items() if k in known})
        sc.validate()
        return sc

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        """Raise ScenarioError listing every violated constraint."""
        errors: list[str] = []
        if self.experiment not in EXPERIMENTS:
            errors.append(
                f"experiment {self.experiment!r} is not one of {list(EXPERIMENTS)}"
            )
        if self.mode not in MODES:
            errors.append(f"mode {self.mode!r} is not one of {list(MODES)}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            errors.append("seed must be an integer in [0, 2^64)")

        domain = None
        if isinstance(self.domain, str):
            if self.domain not in BUNDLED_DOMAINS:
                errors.append(
                    f"domain {self.domain!r} is not bundled; "
                    f"known: {sorted(BUNDLED_DOMAINS)}"
                )
            else:
                domain = BUNDLED_DOMAINS[self.domain]()
        elif isinstance(self.domain, dict):
            try:
                domain = PolygonalDomain.from_json_dict(self.domain)
            except (Cat0PursuitError, KeyError, TypeError, ValueError) as exc:
                errors.append(f"inline domain rejected: {exc}")
        else:
            errors.append("domain must be a bundled name or a domain object")

        if self.experiment in _USED_BY:
            used = set(_COMMON) | set(_USED_BY[self.experiment])
            for f in fields(self):
                if getattr(self, f.name) is not None and f.name not in used:
                    errors.append(
                        f"field {f.name!r} is not used by experiment "
                        f"{self.experiment!r}"
                    )

        self._check_numbers(errors)
        self._check_strategies(errors)
        if domain is not None:
            self._check_points(domain, errors)
            self._check_dt(domain, errors)
        if errors:
            raise ScenarioError("; ".join(errors))

    def _check_numbers(self, errors: list[str]) -> None:
        for name in ("epsilon", "dt", "t_max", "t1"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, (int, float)) or v <= 0):
                errors.append(f"{name} must be a positive number")
        for name in ("trials", "windows"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 1):
                errors.append(f"{name} must be a positive integer")
        if self.drift_n is not None and (
            not isinstance(self.drift_n, (int, float)) or self.drift_n < 0
        ):
            errors.append("drift_n must be a number >= 0")
        if self.n_list is not None:
            ok = (
                isinstance(self.n_list, list)
                and len(self.n_list) >= 2
                and all(isinstance(n, int) and n >= 1 for n in self.n_list)
                and all(a < b for a, b in zip(self.n_list, self.n_list[1:]))
            )
            if not ok:
                errors.append("n_list must be an increasing list of >= 2 positive integers")
        if self.checks is not None:
            if not (isinstance(self.checks, list) and all(isinstance(c, str) for c in self.checks)):
                errors.append("checks must be a list of check names")

    def _check_strategies(self, errors: list[str]) -> None:
        if self.evader is not None:
            kind = self.evader.get("kind") if isinstance(self.evader, dict) else None
            if kind not in STRATEGY_KINDS:
                errors.append(
                    f"evader kind {kind!r} unknown; known: {sorted(STRATEGY_KINDS)}"
                )
        if self.coupling is not None:
            kind = self.coupling.get("kind") if isinstance(self.coupling, dict) else None
            if kind not in COUPLING_KINDS:
                errors.append(
                    f"coupling kind {kind!r} unknown; known: {sorted(COUPLING_KINDS)}"
                )

    def _check_points(self, domain: PolygonalDomain, errors: list[str]) -> None:
        for name in ("x0", "y0"):
            p = getattr(self, name)
            if p is None:
                continue
            ok = (
                isinstance(p, list)
                and len(p) == 2
                and all(isinstance(c, (int, float)) for c in p)
            )
            if not ok:
                errors.append(f"{name} must be a 2-element point [x, y]")
            elif self.mode in MODES and contains(domain, p, self.mode) == "exterior":
                errors.append(f"{name} {p} lies outside the {self.mode} closure")
        wps = (self.evader or {}).get("waypoints")
        if wps is not None:
            for i, w in enumerate(wps):
                ok = (
                    isinstance(w, list)
                    and len(w) == 2
                    and all(isinstance(c, (int, float)) for c in w)
                )
                if not ok:
                    errors.append(f"waypoint {i} must be a 2-element point")
                elif self.mode in MODES and contains(domain, w, self.mode) == "exterior":
                    errors.append(f"waypoint {i} {w} lies outside the {self.mode} closure")

    def _check_dt(self, domain: PolygonalDomain, errors: list[str]) -> None:
        if self.dt is None or not isinstance(self.dt, (int, float)) or self.dt <= 0:
            return
        slack = 1.0 + 1e-12
        if self.experiment == "pursue":
            eps = self.epsilon if isinstance(self.epsilon, (int, float)) else 0.2
            cap = min(
                domain.cone_radius / (8.0 * domain.lipschitz),
                domain.rounding_radius / 4.0,
                eps / 8.0,
            )
            if self.dt > cap * slack:
                errors.append(
                    f"dt={self.dt:g} exceeds the pursuit cap "
                    f"min(delta/(8*lambda), r/4, eps/8) = {cap:g}"
                )
        elif self.experiment in ("couple", "probe", "rescale"):
            cap = (domain.rounding_radius / 8.0) ** 2
            if self.dt > cap * slack:
                errors.append(
                    f"dt={self.dt:g} exceeds the noise-step cap (r/8)^2 = {cap:g}"
                )

    # -- execution helpers ---------------------------------------------------

    def build_domain(self) -> PolygonalDomain:
        if isinstance(self.domain, str):
            return BUNDLED_DOMAINS[self.domain]()
        return PolygonalDomain.from_json_dict(self.domain)

    def retarget(self, experiment: str) -> "Scenario":
        """Rebuild for another experiment, dropping fields it does not use.

        This is what lets one scenario file serve several subcommands: the
        domain, mode and seed carry over, experiment-specific leftovers are
        discarded instead of tripping the strict field check.
        """
        if experiment == self.experiment:
            return self
        keep = set(_COMMON) | set(_USED_BY.get(experiment, ()))
        data = {k: v for k, v in self.to_json_dict().items() if k in keep}
        data["experiment"] = experiment
        return Scenario.from_json_dict(data)

    @property
    def domain_label(self) -> str:
        return self.domain if isinstance(self.domain, str) else "inline"


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {p}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {p} is not valid JSON: {exc}") from None
    return Scenario.from_json_dict(data)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(scenario.to_json_dict(), indent=2, sort_keys=True) + "\n"
    )


def _parse_value(raw: str):
    # JSON literal when it parses, bare string otherwise, so that
    # --set mode=sharp and --set epsilon=0.25 both do the obvious thing
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(data: dict, assignments: list[str]) -> dict:
    """Apply dotted key=value overrides to a raw scenario dict."""
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ScenarioError(f"override {item!r} is not of the form key=value")
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.get(part)
            if nxt is None:
                nxt = {}
                node[part] = nxt
            elif not isinstance(nxt, dict):
                raise ScenarioError(
                    f"override {key!r} descends through non-object field {part!r}"
                )
            node = nxt
        node[parts[-1]] = _parse_value(raw)
    return data
