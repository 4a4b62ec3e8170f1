"""Lie-Trotter (S1) and Strang (S2) time-splitting steppers for the 1D NLDE

    i d_t Phi = (1/eps^2) Q Phi + V(x) Phi + F(Phi) Phi,
    F(Phi) = lambda1 (Phi^* sigma3 Phi) sigma3 + lambda2 |Phi|^2 I.

F is real diagonal, so the potential/nonlinear sub-flow is an exact pointwise
phase rotation and both sub-flows are unitary.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .spectral import FreeFlowKernel, Grid, SpinorField

log = logging.getLogger(__name__)

SCHEMES = ("S1", "S2")


class NumericalFailure(RuntimeError):
    """Raised when an evolution produces non-finite values."""

    def __init__(self, step: int, message: str = "non-finite values"):
        super().__init__(f"{message} at step {step}")
        self.step = step


@dataclass(frozen=True, eq=False)
class PhysicsParams:
    eps: float
    lambda1: float = 1.0
    lambda2: float = 0.0
    potential: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if self.potential is not None:
            v = np.asarray(self.potential, dtype=float)
            if v.ndim != 1 or not np.isfinite(v).all():
                raise ValueError("potential must be a finite real 1D array")
            v.setflags(write=False)
            object.__setattr__(self, "potential", v)

    def potential_on(self, grid: Grid) -> np.ndarray:
        if self.potential is None:
            return np.zeros(grid.M)
        if self.potential.shape != (grid.M,):
            raise ValueError(f"potential has {self.potential.shape[0]} samples, grid has {grid.M}")
        return self.potential


@dataclass(frozen=True, eq=False)
class SchemeRun:
    scheme: str
    tau: float
    steps: int
    params: PhysicsParams
    initial: SpinorField

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ValueError(f"steps must be a non-negative integer, got {self.steps}")

    @property
    def final_time(self) -> float:
        return self.tau * self.steps

    @classmethod
    def to_time(cls, scheme, tau, T, params, initial, rtol=1e-9) -> "SchemeRun":
        """Build a run reaching time T; T/tau must be an integer to within rtol."""
        steps = round(T / tau)
        if steps < 1 or abs(steps * tau - T) > rtol * abs(T):
            raise ValueError(f"tau={tau!r} does not divide T={T!r} (T/tau={T / tau!r})")
        return cls(scheme, tau, steps, params, initial)


def _nonlinear_diag(values: np.ndarray, lambda1: float, lambda2: float) -> np.ndarray:
    a = values.real**2 + values.imag**2
    s = a[0] - a[1]
    rho = a[0] + a[1]
    return np.stack([lambda1 * s + lambda2 * rho, -lambda1 * s + lambda2 * rho])


def nonlinearity(f: SpinorField, lambda1: float, lambda2: float) -> np.ndarray:
    """Diagonal entries (d1_j, d2_j) of F(Phi) at every node, shape (2, M), real."""
    return _nonlinear_diag(f.values, lambda1, lambda2)


def _potential_flow(values, tau, V, lambda1, lambda2):
    d = _nonlinear_diag(values, lambda1, lambda2)
    d += V
    return values * np.exp(-1j * tau * d)


def potential_flow(f: SpinorField, tau: float, params: PhysicsParams) -> SpinorField:
    """phi_k <- exp(-i tau (V + d_k)) phi_k pointwise, F evaluated at the input."""
    V = params.potential_on(f.grid)
    return SpinorField(f.grid, _potential_flow(f.values, tau, V, params.lambda1, params.lambda2))


class _Stepper:
    """Precomputed kernels for repeated steps with fixed (grid, tau, params)."""

    def __init__(self, grid: Grid, tau: float, params: PhysicsParams):
        self.tau = tau
        self.V = params.potential_on(grid)
        self.l1, self.l2 = params.lambda1, params.lambda2
        self.full = FreeFlowKernel(grid, -tau, params.eps)
        self.half = FreeFlowKernel(grid, -0.5 * tau, params.eps)

    def potential(self, values):
        return _potential_flow(values, self.tau, self.V, self.l1, self.l2)

    def lie(self, values):
        return self.full.apply(self.potential(values))

    def strang(self, values):
        return self.half.apply(self.potential(self.half.apply(values)))


def lie_step(f: SpinorField, tau: float, params: PhysicsParams) -> SpinorField:
    """Phi^{n+1} = exp(-i tau Q/eps^2) exp(-i tau [V + F(Phi^n)]) Phi^n."""
    return SpinorField(f.grid, _Stepper(f.grid, tau, params).lie(f.values))


def strang_step(f: SpinorField, tau: float, params: PhysicsParams) -> SpinorField:
    """Half free flow, full potential flow with F at the half-step state, half free flow."""
    return SpinorField(f.grid, _Stepper(f.grid, tau, params).strang(f.values))


@dataclass
class EvolveResult:
    field: SpinorField
    steps: int
    max_mass_drift: float
    snapshots: list[tuple[int, SpinorField]]


def evolve(run: SchemeRun, snapshot_every: int | None = None) -> EvolveResult:
    """Apply ``run.steps`` steps of the chosen scheme to ``run.initial``.

    Consecutive Strang half free flows are fused into one full free flow; the
    outer half steps are applied at the ends (and for every snapshot). The
    relative L2 mass drift is tracked every step and any non-finite value
    aborts with :class:`NumericalFailure` naming the step.
    """
    grid = run.initial.grid
    st = _Stepper(grid, run.tau, run.params)
    u = run.initial.values.copy()
    h = grid.h
    mass0 = np.sqrt(h * np.sum(np.abs(u) ** 2))
    drift = 0.0
    snapshots = []
    if snapshot_every:
        snapshots.append((0, run.initial))

    def check(n, values):
        nonlocal drift
        m = np.sqrt(h * np.sum(values.real**2 + values.imag**2))
        if not np.isfinite(m):
            raise NumericalFailure(n)
        if mass0 > 0:
            drift = max(drift, abs(m - mass0) / mass0)

    if run.scheme == "S1":
        for n in range(1, run.steps + 1):
            u = st.lie(u)
            check(n, u)
            if snapshot_every and n % snapshot_every == 0:
                snapshots.append((n, SpinorField(grid, u)))
    elif run.steps > 0:
        # u holds the state after the leading half free flow of the current step
        u = st.half.apply(u)
        for n in range(1, run.steps + 1):
            u = st.potential(u)
            out = st.half.apply(u) if (n == run.steps or (snapshot_every and n % snapshot_every == 0)) else None
            if out is not None:
                check(n, out)
                if snapshot_every and n % snapshot_every == 0:
                    snapshots.append((n, SpinorField(grid, out)))
            if n < run.steps:
                u = st.full.apply(u)
                if out is None:
                    check(n, u)
        u = out
    if snapshot_every and snapshots[-1][0] != run.steps:
        snapshots.append((run.steps, SpinorField(grid, u)))
    log.debug("evolve %s tau=%g steps=%d drift=%.2e", run.scheme, run.tau, run.steps, drift)
    return EvolveResult(SpinorField(grid, u), run.steps, drift, snapshots)
