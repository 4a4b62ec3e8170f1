"""Independent reference implementations used by the tests.

None of these share code with the package: transforms are explicit O(M^2)
sums, mode exponentials come from scipy.linalg.expm, projectors from a dense
eigendecomposition, and the time integrator is classical RK4 applied to the
semi-discrete system built from a dense spectral differentiation matrix.
"""
import numpy as np
from scipy.linalg import expm

from splitdirac.spectral import SpinorField

S1 = np.array([[0, 1], [1, 0]], dtype=complex)
S3 = np.array([[1, 0], [0, -1]], dtype=complex)


def frequencies(a, b, M):
    """(l, mu_l) for l = -M/2 .. M/2-1."""
    l = np.arange(-M // 2, M // 2)
    return l, 2 * np.pi * l / (b - a)


def dft_sum(values, a, b, M):
    """Phi_hat_l = (1/M) sum_j Phi_j exp(-i mu_l (x_j - a)); returns {l: pair}."""
    x = a + (b - a) / M * np.arange(M)
    ls, mus = frequencies(a, b, M)
    out = {}
    for l, mu in zip(ls, mus):
        w = np.exp(-1j * mu * (x - a))
        out[int(l)] = np.array([np.sum(values[0] * w), np.sum(values[1] * w)]) / M
    return out


def idft_sum(coeffs, a, b, M):
    """Phi_j = sum_l Phi_hat_l exp(i mu_l (x_j - a)) from a {l: pair} dict."""
    x = a + (b - a) / M * np.arange(M)
    ls, mus = frequencies(a, b, M)
    out = np.zeros((2, M), dtype=complex)
    for l, mu in zip(ls, mus):
        out += np.outer(coeffs[int(l)], np.exp(1j * mu * (x - a)))
    return out


def derivative_matrix(a, b, M):
    """Dense D with (D u)_j = i sum_l mu_l u_hat_l exp(i mu_l (x_j - a)), Nyquist included."""
    x = a + (b - a) / M * np.arange(M)
    _, mus = frequencies(a, b, M)
    E = np.exp(1j * np.outer(x - a, mus))          # synthesis, (j, l)
    F = np.exp(-1j * np.outer(mus, x - a)) / M     # analysis, (l, j)
    return E @ np.diag(1j * mus) @ F


def mode_free_flow(pair, mu, t, eps):
    """exp(i t/eps^2 (sigma3 + eps mu sigma1)) applied to one coefficient pair."""
    return expm(1j * t / eps**2 * (S3 + eps * mu * S1)) @ pair


def mode_projector(pair, mu, eps, sign):
    """Spectral projector onto the eigenvalue of sign `sign` via eigh."""
    w, V = np.linalg.eigh(S3 + eps * mu * S1)
    k = int(np.argmax(w)) if sign > 0 else int(np.argmin(w))
    v = V[:, k:k + 1]
    return (v @ v.conj().T) @ pair


def nlde_rhs(U, D, eps, V, lambda1, lambda2):
    """-i [ (1/eps^2)(-i eps sigma1 D + sigma3) U + V U + F(U) U ]."""
    p1, p2 = U
    a1, a2 = abs(p1) ** 2, abs(p2) ** 2
    s, rho = a1 - a2, a1 + a2
    q1 = (-1j * eps * (D @ p2) + p1) / eps**2
    q2 = (-1j * eps * (D @ p1) - p2) / eps**2
    d1 = lambda1 * s + lambda2 * rho + V
    d2 = -lambda1 * s + lambda2 * rho + V
    return -1j * np.array([q1 + d1 * p1, q2 + d2 * p2])


def rk4(U, T, dt, D, eps, V, lambda1, lambda2):
    """Classical RK4 to time T with about dt per step (T divided evenly)."""
    n = max(1, int(np.ceil(T / dt)))
    k = T / n
    U = np.array(U, dtype=complex)
    for _ in range(n):
        k1 = nlde_rhs(U, D, eps, V, lambda1, lambda2)
        k2 = nlde_rhs(U + k / 2 * k1, D, eps, V, lambda1, lambda2)
        k3 = nlde_rhs(U + k / 2 * k2, D, eps, V, lambda1, lambda2)
        k4 = nlde_rhs(U + k * k3, D, eps, V, lambda1, lambda2)
        U = U + k / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return U


def slopes(errors):
    """log2 ratios of consecutive errors under tau-halving."""
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])


def random_field(grid, rng, smooth=False):
    """Random spinor; smooth=True keeps only the lowest quarter of the modes."""
    v = rng.standard_normal((2, grid.M)) + 1j * rng.standard_normal((2, grid.M))
    if smooth:
        c = np.fft.fft(v, axis=-1)
        k = np.abs(np.fft.fftfreq(grid.M, 1 / grid.M))
        c[:, k > grid.M // 8] = 0
        v = np.fft.ifft(c, axis=-1)
    return SpinorField(grid, v)
