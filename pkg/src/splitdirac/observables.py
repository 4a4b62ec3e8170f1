"""Physical observables (density, current, energy) and discrete error metrics.

All l1 norms carry the mesh weight h, so ``density_error_l1`` is
h * sum_j |rho_j - rho_ref_j| and the current norms sum |J1| + |J2| per node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .schemes import PhysicsParams
from .spectral import SpinorField, _check_same_grid, spectral_derivative

ENERGY_IMAG_RTOL = 1e-10


class UndefinedRelativeMetric(ZeroDivisionError):
    """A relative error was requested against a zero reference."""


class EnergyResidualError(ArithmeticError):
    """The discrete energy has a non-negligible imaginary part."""


@dataclass(frozen=True, eq=False)
class ObservableSet:
    density: np.ndarray
    current: np.ndarray
    energy: float
    mass: float


@dataclass
class ErrorRecord:
    eps: float
    tau: float
    h1: float = math.nan
    l1_density: float = math.nan
    rel_l1_current: float = math.nan
    rel_energy: float = math.nan
    abs_energy: float = math.nan
    # metric name -> observed order against the previous tau in the row (None if absent)
    orders: dict[str, float | None] = field(default_factory=dict)
    failure: str | None = None


def density(f: SpinorField) -> np.ndarray:
    return np.sum(f.values.real**2 + f.values.imag**2, axis=0)


def current(f: SpinorField, eps: float) -> np.ndarray:
    """(J1, J2) per node, J_k = Phi^* sigma_k Phi / eps; shape (2, M), real by construction."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    z = np.conj(f.phi1) * f.phi2
    return np.stack([2 * z.real, 2 * z.imag]) / eps


def energy(f: SpinorField, params: PhysicsParams, zero_nyquist: bool = False) -> float:
    eps = params.eps
    h = f.grid.h
    phi = f.values
    dphi = spectral_derivative(f, zero_nyquist).values
    a = phi.real**2 + phi.imag**2
    rho = a[0] + a[1]
    s = a[0] - a[1]
    # Phi^* sigma1 Phi' = conj(phi1) phi2' + conj(phi2) phi1'
    kinetic = -1j / eps * (np.conj(phi[0]) * dphi[1] + np.conj(phi[1]) * dphi[0])
    V = params.potential_on(f.grid)
    terms = kinetic + s / eps**2 + V * rho + 0.5 * params.lambda1 * s**2 + 0.5 * params.lambda2 * rho**2
    E = h * np.sum(terms)
    scale = max(abs(E.real), h * np.sum(np.abs(terms)))
    if abs(E.imag) > ENERGY_IMAG_RTOL * scale:
        raise EnergyResidualError(f"energy imaginary residual {E.imag:.3e} exceeds {ENERGY_IMAG_RTOL:g} * {scale:.3e}")
    return float(E.real)


def observables(f: SpinorField, params: PhysicsParams) -> ObservableSet:
    return ObservableSet(density(f), current(f, params.eps), energy(f, params), f.norm())


def h1_error(num: SpinorField, ref: SpinorField, zero_nyquist: bool = False) -> float:
    """sqrt(h sum |ref - num|^2 + h sum |ref' - num'|^2) with spectral derivatives."""
    _check_same_grid(num.grid, ref.grid)
    h = num.grid.h
    diff = ref.values - num.values
    ddiff = spectral_derivative(ref, zero_nyquist).values - spectral_derivative(num, zero_nyquist).values
    return float(np.sqrt(h * np.sum(np.abs(diff) ** 2) + h * np.sum(np.abs(ddiff) ** 2)))


def density_error_l1(num: SpinorField, ref: SpinorField) -> float:
    _check_same_grid(num.grid, ref.grid)
    return float(num.grid.h * np.sum(np.abs(density(num) - density(ref))))


def current_error_rel_l1(num: SpinorField, ref: SpinorField, eps: float) -> float:
    _check_same_grid(num.grid, ref.grid)
    h = num.grid.h
    jref = current(ref, eps)
    denom = h * np.sum(np.abs(jref))
    if denom == 0:
        raise UndefinedRelativeMetric("relative metric undefined: reference current vanishes")
    return float(h * np.sum(np.abs(current(num, eps) - jref)) / denom)


def energy_error_abs(num: SpinorField, ref: SpinorField, params: PhysicsParams) -> float:
    _check_same_grid(num.grid, ref.grid)
    return abs(energy(num, params) - energy(ref, params))


def energy_error_rel(num: SpinorField, ref: SpinorField, params: PhysicsParams) -> float:
    """|E(num) - E(ref)| / |E(ref)|."""
    _check_same_grid(num.grid, ref.grid)
    eref = energy(ref, params)
    if eref == 0:
        raise UndefinedRelativeMetric("relative metric undefined: reference energy is zero")
    return abs(energy(num, params) - eref) / abs(eref)
