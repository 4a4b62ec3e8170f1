"""Experiment configuration: potentials, initial data, sweep plans, TOML loading.

Numeric config entries may be numbers or constant expressions such as
``"2*pi*1e-5"``. A full example lives in ``configs/s1_resonant.toml``.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..resonance import DEFAULT_DELTA
from ..schemes import SCHEMES, PhysicsParams
from ..spectral import Grid, SpinorField, make_grid
from .expression import EvaluationError, eval_constant, evaluate, parse

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

METRICS = ("h1", "density", "current", "energy")
# legacy kind names accepted in configs and on the command line
DEFAULT_TAU_E = 2 * math.pi * 1e-5


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialSpec:
    kind: str = "zero"  # zero | rational | expression
    expression: str | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "rational", "expression"):
            raise ConfigError(f"unknown potential kind {self.kind!r}")
        if self.kind == "expression":
            if not self.expression:
                raise ConfigError("expression potential needs an 'expression'")
            parse(self.expression)

    def label(self) -> str:
        return self.expression if self.kind == "expression" else self.kind


def parse_potential(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    """Sample V at the grid nodes."""
    x = grid.x
    if spec.kind == "zero":
        return np.zeros(grid.M)
    if spec.kind == "rational":
        return (x - 1.0) / (x**2 + 1.0)
    values = np.broadcast_to(np.asarray(evaluate(parse(spec.expression), x), dtype=float), x.shape)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        j = int(bad[0])
        raise EvaluationError(f"potential {spec.expression!r} is not finite at node j={j} (x={x[j]!r})")
    return np.array(values)


@dataclass(frozen=True)
class GaussianComponent:
    center: float = 0.0
    width: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ConfigError(f"Gaussian width must be positive, got {self.width}")

    def sample(self, x: np.ndarray) -> np.ndarray:
        return self.amplitude * np.exp(-((x - self.center) ** 2) / (2 * self.width**2))


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "two_gaussians"  # two_gaussians | custom_gaussians
    # None for a component means it is identically zero
    components: tuple[GaussianComponent | None, GaussianComponent | None] = (None, None)

    def __post_init__(self):
        if self.kind not in ("two_gaussians", "custom_gaussians"):
            raise ConfigError(f"unknown initial kind {self.kind!r}")


def initial_field(spec: InitialSpec, grid: Grid) -> SpinorField:
    """two_gaussians: phi1 = exp(-x^2/2), phi2 = exp(-(x-1)^2/2)."""
    if spec.kind == "two_gaussians":
        comps = (GaussianComponent(0.0, 1.0), GaussianComponent(1.0, 1.0))
    else:
        comps = spec.components
    x = grid.x
    vals = [c.sample(x) if c is not None else np.zeros(grid.M) for c in comps]
    return SpinorField.from_components(grid, *vals)


@dataclass(frozen=True)
class GridSpec:
    a: float
    b: float
    M: int

    def build(self) -> Grid:
        return make_grid(self.a, self.b, self.M)


@dataclass(frozen=True)
class TauRule:
    kind: str  # resonant | non_resonant | list
    tau0: float = math.pi / 4
    ratio: float = 4.0
    count: int = 6
    delta: float = DEFAULT_DELTA
    taus: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("resonant", "non_resonant", "list"):
            raise ConfigError(f"unknown tau rule {self.kind!r}")
        if self.kind == "list" and not self.taus:
            raise ConfigError("tau rule 'list' needs taus")
        if not self.ratio > 1:
            raise ConfigError("tau ratio must exceed 1")

    def values(self) -> list[float]:
        if self.kind == "list":
            return list(self.taus)
        return [self.tau0 / self.ratio**k for k in range(self.count)]


@dataclass(frozen=True)
class ExperimentPlan:
    grid: GridSpec
    T: float
    eps: tuple[float, ...]
    tau_rule: TauRule
    scheme: str = "S1"
    lambda1: float = 1.0
    lambda2: float = 0.0
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    reference_scheme: str = "S2"
    tau_e: float = DEFAULT_TAU_E
    metrics: tuple[str, ...] = ("h1",)
    zero_nyquist: bool = False
    out_dir: str = "out"
    name: str = "table"
    format: str = "csv"

    def __post_init__(self):
        if self.scheme not in SCHEMES or self.reference_scheme not in SCHEMES:
            raise ConfigError(f"schemes must be among {SCHEMES}")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad:
            raise ConfigError(f"unknown metrics {bad}; choose from {METRICS}")
        if self.format not in ("csv", "markdown"):
            raise ConfigError(f"format must be csv or markdown, got {self.format!r}")
        for e in self.eps:
            if not 0 < e <= 1:
                raise ConfigError(f"eps values must lie in (0, 1], got {e}")
        steps_for(self.T, self.tau_e)
        for tau in self.taus:
            steps_for(self.T, tau)
        if self.tau_rule.kind == "resonant":
            for e in self.eps:
                for tau in self.taus:
                    check_resonant(tau, e)

    @property
    def taus(self) -> list[float]:
        return self.tau_rule.values()

    def physics(self, eps: float, grid: Grid | None = None) -> PhysicsParams:
        grid = grid or self.grid.build()
        return PhysicsParams(eps, self.lambda1, self.lambda2, parse_potential(self.potential, grid))

    def with_overrides(self, **kw) -> "ExperimentPlan":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def steps_for(T: float, tau: float, rtol: float = 1e-9) -> int:
    """Step count round(T/tau), asserting tau divides T to one part in 1e9."""
    if not tau > 0:
        raise ConfigError(f"tau must be positive, got {tau}")
    n = round(T / tau)
    if n < 1 or abs(n * tau - T) > rtol * abs(T):
        raise ConfigError(f"tau={tau!r} does not divide T={T!r}")
    return n


def check_resonant(tau: float, eps: float, rtol: float = 1e-9):
    """Steps at or above eps^2 pi/2 must be exact multiples k eps^2 pi/2."""
    k = tau / (0.5 * eps**2 * math.pi)
    if k >= 1 - rtol and abs(k - round(k)) > rtol * k:
        raise ConfigError(f"tau={tau!r} is not of the form k*eps^2*pi/2 for eps={eps!r} (k={k!r})")


# ---------------------------------------------------------------------------
# TOML loading


def _num(v, what):
    try:
        return eval_constant(v)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad numeric value for {what}: {v!r} ({exc})") from None


def _grid_from(d: dict) -> GridSpec:
    a, b = _num(d.get("a", -32), "grid.a"), _num(d.get("b", 32), "grid.b")
    if "M" in d:
        M = int(d["M"])
    elif "h" in d:
        h = _num(d["h"], "grid.h")
        M = round((b - a) / h)
        if abs(M * h - (b - a)) > 1e-9 * (b - a):
            raise ConfigError(f"mesh h={h} does not divide the domain ({a}, {b})")
    else:
        M = round((b - a) * 16)
    return GridSpec(a, b, M)


def _potential_from(v) -> PotentialSpec:
    if v is None:
        return PotentialSpec()
    if isinstance(v, dict):
        return PotentialSpec(v.get("kind", "expression"), v.get("expression"))
    if v in ("zero", "rational"):
        return PotentialSpec(v)
    return PotentialSpec("expression", str(v))


def _initial_from(d: dict | None) -> InitialSpec:
    if not d or d.get("kind", "two_gaussians") == "two_gaussians":
        return InitialSpec()
    comps = []
    for key in ("phi1", "phi2"):
        c = d.get(key)
        comps.append(None if c is None else GaussianComponent(
            _num(c.get("center", 0), f"{key}.center"),
            _num(c.get("width", 1), f"{key}.width"),
            _num(c.get("amplitude", 1), f"{key}.amplitude")))
    return InitialSpec("custom_gaussians", tuple(comps))


def _eps_from(d: dict) -> tuple[float, ...]:
    if "eps" in d:
        return tuple(_num(e, "experiment.eps") for e in d["eps"])
    eps0 = _num(d.get("eps0", 1.0), "experiment.eps0")
    return tuple(eps0 / 2**k for k in d.get("eps_halvings", [0]))


def _tau_rule_from(d: dict) -> TauRule:
    kind = d.get("kind", "resonant")
    if kind == "list":
        return TauRule("list", taus=tuple(_num(t, "tau_rule.taus") for t in d["taus"]))
    return TauRule(kind, _num(d.get("tau0", "pi/4"), "tau_rule.tau0"), _num(d.get("ratio", 4), "tau_rule.ratio"),
                   int(d.get("count", 6)), _num(d.get("delta", DEFAULT_DELTA), "tau_rule.delta"))


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def plan_from_dict(cfg: dict) -> ExperimentPlan:
    """Build a plan from the parsed config (sections grid/physics/initial/experiment/reference/output)."""
    phys = cfg.get("physics", {})
    exp = cfg.get("experiment", {})
    ref = cfg.get("reference", {})
    out = cfg.get("output", {})
    if "T" not in exp:
        raise ConfigError("experiment.T is required")
    return ExperimentPlan(
        grid=_grid_from(cfg.get("grid", {})),
        T=_num(exp["T"], "experiment.T"),
        eps=_eps_from(exp),
        tau_rule=_tau_rule_from(exp.get("tau_rule", {})),
        scheme=exp.get("scheme", "S1"),
        lambda1=_num(phys.get("lambda1", 1.0), "physics.lambda1"),
        lambda2=_num(phys.get("lambda2", 0.0), "physics.lambda2"),
        potential=_potential_from(phys.get("potential")),
        initial=_initial_from(cfg.get("initial")),
        reference_scheme=ref.get("scheme", "S2"),
        tau_e=_num(ref.get("tau_e", DEFAULT_TAU_E), "reference.tau_e"),
        metrics=tuple(exp.get("metrics", ["h1"])),
        zero_nyquist=bool(cfg.get("spectral", {}).get("zero_nyquist", False)),
        out_dir=out.get("dir", "out"),
        name=out.get("name", Path(cfg.get("_source", "table")).stem),
        format=out.get("format", "csv"),
    )


def load_plan(path) -> ExperimentPlan:
    cfg = load_toml(path)
    cfg.setdefault("_source", str(path))
    return plan_from_dict(cfg)
