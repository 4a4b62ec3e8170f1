"""Periodic grid, discrete Fourier pair and phase-space operators.

Spectral coefficients follow the convention

    Phi_hat_l = (1/M) sum_j Phi_j exp(-i mu_l (x_j - a)),   mu_l = 2 l pi / (b - a),

for l = -M/2 .. M/2-1. Internally coefficients are stored in FFT order
(index k holds l = k for k < M/2 and l = k - M otherwise), so the unpaired
Nyquist index l = -M/2 lives at k = M/2 with mu = -M pi / (b - a).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "SpinorField",
    "SpectralField",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "dirac_symbol",
    "free_flow",
    "projector",
    "dsemigroup",
    "spectral_derivative",
    "FreeFlowKernel",
]

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on (a, b) with M nodes x_j = a + j h."""

    a: float
    b: float
    M: int

    def __post_init__(self):
        if not (isinstance(self.M, (int, np.integer)) and self.M >= 2 and self.M % 2 == 0):
            raise ValueError(f"M must be an even integer >= 2, got {self.M!r}")
        if not self.b > self.a:
            raise ValueError(f"need b > a, got a={self.a}, b={self.b}")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.M

    @cached_property
    def x(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.M)

    @cached_property
    def indices(self) -> np.ndarray:
        """Frequency index l for each FFT-ordered slot."""
        k = np.arange(self.M)
        return np.where(k < self.M // 2, k, k - self.M)

    @cached_property
    def mu(self) -> np.ndarray:
        """Frequencies mu_l in FFT order (Nyquist slot carries -M pi / (b - a))."""
        return 2.0 * np.pi * self.indices / self.length

    def slot(self, l: int) -> int:
        """FFT-ordered storage slot for frequency index l."""
        if not -self.M // 2 <= l < self.M // 2:
            raise IndexError(f"frequency index {l} outside [-M/2, M/2)")
        return l % self.M

    def same_as(self, other: "Grid") -> bool:
        return (self.a, self.b, self.M) == (other.a, other.b, other.M)


def make_grid(a: float, b: float, M: int) -> Grid:
    return Grid(float(a), float(b), M)


def _check_same_grid(g1: Grid, g2: Grid):
    if not g1.same_as(g2):
        raise ValueError(f"grid mismatch: {g1} vs {g2}")


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Two-component complex field sampled on a grid; values has shape (2, M)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (2, self.grid.M):
            raise ValueError(f"expected values of shape (2, {self.grid.M}), got {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("spinor field contains non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_components(cls, grid: Grid, phi1, phi2) -> "SpinorField":
        phi1 = np.broadcast_to(np.asarray(phi1, dtype=complex), (grid.M,))
        phi2 = np.broadcast_to(np.asarray(phi2, dtype=complex), (grid.M,))
        return cls(grid, np.stack([phi1, phi2]))

    @property
    def phi1(self) -> np.ndarray:
        return self.values[0]

    @property
    def phi2(self) -> np.ndarray:
        return self.values[1]

    def norm(self) -> float:
        """Discrete L2 norm sqrt(h sum_j |Phi_j|^2)."""
        return float(np.sqrt(self.grid.h * np.sum(np.abs(self.values) ** 2)))

    def __add__(self, other: "SpinorField") -> "SpinorField":
        _check_same_grid(self.grid, other.grid)
        return SpinorField(self.grid, self.values + other.values)

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        _check_same_grid(self.grid, other.grid)
        return SpinorField(self.grid, self.values - other.values)

    def __mul__(self, c) -> "SpinorField":
        return SpinorField(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a spinor field, FFT-ordered, shape (2, M)."""

    grid: Grid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (2, self.grid.M):
            raise ValueError(f"expected coefficients of shape (2, {self.grid.M}), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def coefficient(self, l: int) -> np.ndarray:
        """The pair Phi_hat_l."""
        return self.coefficients[:, self.grid.slot(l)]

    def ordered(self) -> tuple[np.ndarray, np.ndarray]:
        """(l, coefficients) with l running -M/2 .. M/2-1."""
        order = np.argsort(self.grid.indices)
        return self.grid.indices[order], self.coefficients[:, order]

    @classmethod
    def single_mode(cls, grid: Grid, l: int, pair=(1.0, 0.0)) -> "SpectralField":
        c = np.zeros((2, grid.M), dtype=complex)
        c[:, grid.slot(l)] = pair
        return cls(grid, c)


# Array-level transforms. x_j - a = j h, so exp(-i mu_l (x_j - a)) = exp(-2 pi i l j / M)
# and Phi_hat_l = (1/M) sum_j Phi_j exp(-i mu_l (x_j - a)) is the forward FFT divided by M.

def _fwd(values: np.ndarray) -> np.ndarray:
    return sfft.fft(values, axis=-1, norm="forward")


def _inv(coeffs: np.ndarray) -> np.ndarray:
    return sfft.ifft(coeffs, axis=-1, norm="forward")


def forward_transform(f: SpinorField) -> SpectralField:
    return SpectralField(f.grid, _fwd(f.values))


def inverse_transform(g: SpectralField, grid: Grid | None = None) -> SpinorField:
    if grid is not None:
        _check_same_grid(grid, g.grid)
    return SpinorField(g.grid, _inv(g.coefficients))


def _check_eps(eps: float):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")


def dirac_symbol(mu: float, eps: float) -> np.ndarray:
    """Fourier symbol of -i eps sigma1 d/dx + sigma3, i.e. sigma3 + eps mu sigma1."""
    return SIGMA3 + eps * mu * SIGMA1


def _delta(mu: np.ndarray, eps: float) -> np.ndarray:
    return np.sqrt(1.0 + (eps * mu) ** 2)


class FreeFlowKernel:
    """Per-mode 2x2 unitaries exp(i t/eps^2 (sigma3 + eps mu sigma1)), precomputed.

    With S = symbol/delta (S^2 = I) the exponential is cos(theta) I + i sin(theta) S,
    theta = t delta / eps^2. The kernel acts on FFT-ordered coefficient arrays.
    """

    def __init__(self, grid: Grid, t: float, eps: float):
        _check_eps(eps)
        mu = grid.mu
        delta = _delta(mu, eps)
        theta = t * delta / eps**2
        c = np.cos(theta)
        s = np.sin(theta) / delta
        self.diag_up = c + 1j * s
        self.diag_down = c - 1j * s
        self.off = 1j * s * eps * mu

    def apply_spectral(self, coeffs: np.ndarray) -> np.ndarray:
        u, v = coeffs[0], coeffs[1]
        out = np.empty_like(coeffs)
        out[0] = self.diag_up * u + self.off * v
        out[1] = self.off * u + self.diag_down * v
        return out

    def apply(self, values: np.ndarray) -> np.ndarray:
        return _inv(self.apply_spectral(_fwd(values)))


def free_flow(f: SpinorField, t: float, eps: float) -> SpinorField:
    """Apply exp(i t Q/eps^2); the splitting schemes use t = -tau."""
    return SpinorField(f.grid, FreeFlowKernel(f.grid, t, eps).apply(f.values))


def projector(f: SpinorField, sign: str | int, eps: float) -> SpinorField:
    """Apply Pi_+ or Pi_- = (I +/- symbol/delta)/2 mode by mode."""
    _check_eps(eps)
    if sign in ("+", 1, +1):
        sgn = 1.0
    elif sign in ("-", -1):
        sgn = -1.0
    else:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    mu = f.grid.mu
    delta = _delta(mu, eps)
    coeffs = _fwd(f.values)
    u, v = coeffs[0], coeffs[1]
    out = np.empty_like(coeffs)
    out[0] = 0.5 * ((1 + sgn / delta) * u + sgn * eps * mu / delta * v)
    out[1] = 0.5 * (sgn * eps * mu / delta * u + (1 - sgn / delta) * v)
    return SpinorField(f.grid, _inv(out))


def dsemigroup_multiplier(mu: np.ndarray, t: float, eps: float) -> np.ndarray:
    # (delta - 1)/eps^2 written as mu^2/(delta + 1) to avoid cancellation at small eps
    mu = np.asarray(mu, dtype=float)
    d = mu**2 / (_delta(mu, eps) + 1.0)
    return np.exp(1j * t * d)


def dsemigroup(f: SpinorField, t: float, eps: float) -> SpinorField:
    """Apply exp(i t D), D = (sqrt(I - eps^2 Laplacian) - I)/eps^2."""
    _check_eps(eps)
    mult = dsemigroup_multiplier(f.grid.mu, t, eps)
    return SpinorField(f.grid, _inv(_fwd(f.values) * mult))


def derivative_multiplier(grid: Grid, zero_nyquist: bool = False) -> np.ndarray:
    m = 1j * grid.mu
    if zero_nyquist:
        m = m.copy()
        m[grid.M // 2] = 0.0
    return m


def spectral_derivative(f: SpinorField, zero_nyquist: bool = False) -> SpinorField:
    """(Phi')_j = i sum_l mu_l Phi_hat_l exp(i mu_l (x_j - a)).

    The sum includes the Nyquist index l = -M/2 unless ``zero_nyquist`` is set.
    """
    return SpinorField(f.grid, _inv(_fwd(f.values) * derivative_multiplier(f.grid, zero_nyquist)))
