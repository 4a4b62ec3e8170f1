"""Non-resonant step-size set

    A_delta(eps) = U_k [eps^2 (k pi + arcsin delta) / 2, eps^2 ((k+1) pi - arcsin delta) / 2],

equivalently {tau > 0 : |sin(2 tau / eps^2)| >= delta}. Interval endpoints count
as non-resonant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

ENDPOINT_GUARD = 1e-14
DEFAULT_DELTA = 0.15


@dataclass(frozen=True)
class ResonanceSpec:
    eps: float
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")

    @property
    def period(self) -> float:
        """Spacing eps^2 pi / 2 between consecutive resonant steps."""
        return 0.5 * self.eps**2 * math.pi

    @property
    def half_gap(self) -> float:
        return 0.5 * self.eps**2 * math.asin(self.delta)

    def interval(self, k: int) -> tuple[float, float]:
        return k * self.period + self.half_gap, (k + 1) * self.period - self.half_gap


def _check_tau(tau):
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")


def is_non_resonant(tau: float, spec: ResonanceSpec) -> bool:
    _check_tau(tau)
    return abs(math.sin(2.0 * tau / spec.eps**2)) >= spec.delta - ENDPOINT_GUARD


def interval_index(tau: float, spec: ResonanceSpec) -> int:
    """Index k of the period window [k P, (k+1) P) containing tau, P = eps^2 pi / 2."""
    _check_tau(tau)
    return math.floor(tau / spec.period)


def in_interval_form(tau: float, spec: ResonanceSpec) -> bool:
    """Membership evaluated directly from the union of closed intervals."""
    _check_tau(tau)
    k = interval_index(tau, spec)
    lo, hi = spec.interval(k)
    return lo <= tau <= hi


def resonant_step(k0: int, eps: float) -> float:
    if int(k0) != k0 or k0 < 1:
        raise ValueError(f"k0 must be a positive integer, got {k0}")
    return 0.5 * k0 * eps**2 * math.pi


def nearest_non_resonant(tau_target: float, spec: ResonanceSpec) -> float:
    """Closest member of A_delta(eps) to ``tau_target``; ties go to the larger step."""
    _check_tau(tau_target)
    if is_non_resonant(tau_target, spec):
        return tau_target
    P, g = spec.period, spec.half_gap
    m = round(tau_target / P)
    candidates = [m * P + g]
    if m >= 1:
        candidates.append(m * P - g)
    best = min(candidates, key=lambda c: (round(abs(c - tau_target) / P, 12), -c))
    # endpoint roundoff at large k: step inward until the predicate agrees
    inward = math.inf if best > m * P else -math.inf
    while not is_non_resonant(best, spec):
        best = math.nextafter(best, inward)
    return best
