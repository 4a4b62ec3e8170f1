import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from splitdirac.resonance import (DEFAULT_DELTA, ResonanceSpec, in_interval_form, interval_index, is_non_resonant,
                                  nearest_non_resonant, resonant_step)


def random_triples(n, seed):
    rng = np.random.default_rng(seed)
    eps = 2.0 ** rng.uniform(-12, 0, n)
    delta = rng.uniform(0, 1, n)
    delta[delta == 0] = 0.5
    tau = 10.0 ** rng.uniform(-8, 1, n)
    return tau, eps, delta


def endpoint_distance(tau, spec):
    k = interval_index(tau, spec)
    ends = [e for j in (k - 1, k, k + 1) for e in spec.interval(j)]
    return min(abs(tau - e) for e in ends)


def predicate_disagreements(n, seed=7):
    """(count of disagreements, count of those farther than 1e-12 from an endpoint)."""
    bad = far = 0
    for tau, eps, delta in zip(*random_triples(n, seed)):
        spec = ResonanceSpec(float(eps), float(delta))
        if is_non_resonant(float(tau), spec) != in_interval_form(float(tau), spec):
            bad += 1
            far += endpoint_distance(float(tau), spec) > 1e-12
    return bad, far


def test_examples():
    s = ResonanceSpec(1.0, 0.15)
    assert is_non_resonant(math.pi / 4, s)
    assert is_non_resonant(0.5 * math.asin(0.15), s)
    assert round(0.5 * math.asin(0.15), 4) == 0.0753
    for k in range(1, 20):
        for eps in (1.0, 0.5, 0.1, 2.0**-9):
            assert not is_non_resonant(0.5 * k * eps**2 * math.pi, ResonanceSpec(eps, 1e-6))


def test_resonant_step():
    assert resonant_step(1, 1.0) == pytest.approx(math.pi / 2)
    assert resonant_step(2, 0.5) == pytest.approx(math.pi / 4)
    for bad in (0, -1, 1.5):
        with pytest.raises(ValueError):
            resonant_step(bad, 1.0)


@given(k0=st.integers(1, 10**6), eps=st.floats(1e-4, 1), delta=st.floats(1e-9, 1))
def test_resonant_step_always_resonant(k0, eps, delta):
    assert not is_non_resonant(resonant_step(k0, eps), ResonanceSpec(eps, delta))


def test_nearest_examples():
    s = ResonanceSpec(1.0, 0.15)
    assert nearest_non_resonant(math.pi / 4, s) == math.pi / 4
    got = nearest_non_resonant(math.pi / 2, s)
    assert got == pytest.approx(math.pi / 2 + 0.5 * math.asin(0.15), rel=1e-14)
    assert got > math.pi / 2


@given(tau=st.floats(1e-6, 50), eps=st.floats(1e-3, 1), delta=st.floats(1e-6, 1))
def test_nearest_is_member_and_closest(tau, eps, delta):
    spec = ResonanceSpec(eps, delta)
    got = nearest_non_resonant(tau, spec)
    assert is_non_resonant(got, spec)
    if not is_non_resonant(tau, spec):
        # the nearest endpoints bracket tau; nothing closer exists in between
        k = round(tau / spec.period)
        best = min(abs(tau - (k * spec.period + spec.half_gap)),
                   abs(tau - (k * spec.period - spec.half_gap)) if k >= 1 else math.inf)
        # the endpoint may be nudged inward by a few ulps so the sine predicate accepts it
        assert abs(got - tau) <= best + 64 * math.ulp(tau)


@given(tau=st.floats(1e-6, 50), eps=st.floats(1e-3, 1), d1=st.floats(1e-6, 1), d2=st.floats(1e-6, 1))
def test_delta_monotonicity(tau, eps, d1, d2):
    lo, hi = sorted((d1, d2))
    if is_non_resonant(tau, ResonanceSpec(eps, hi)):
        assert is_non_resonant(tau, ResonanceSpec(eps, lo))


def test_non_resonant_fraction():
    s = ResonanceSpec(1.0, DEFAULT_DELTA)
    taus = np.linspace(1e-9, 10, 200_001)
    frac = np.mean([is_non_resonant(float(t), s) for t in taus])
    assert frac > 0.9
    # resonant gaps in [0, 10]: [0, g) plus [kP - g, kP + g) for k = 1..6
    g = 0.5 * math.asin(0.15)
    assert frac == pytest.approx(1 - 13 * g / 10, abs=1e-4)


def test_interval_geometry():
    s = ResonanceSpec(0.5, 0.3)
    lo, hi = s.interval(3)
    assert lo == pytest.approx(0.5 * 0.25 * (3 * math.pi + math.asin(0.3)))
    assert hi == pytest.approx(0.5 * 0.25 * (4 * math.pi - math.asin(0.3)))
    assert interval_index(lo + 1e-9, s) == 3


@pytest.mark.parametrize("eps,delta", [(0.0, 0.5), (1.5, 0.5), (0.5, 0.0), (0.5, 1.2)])
def test_spec_validation(eps, delta):
    with pytest.raises(ValueError):
        ResonanceSpec(eps, delta)


def test_tau_validation():
    with pytest.raises(ValueError):
        is_non_resonant(0.0, ResonanceSpec(1.0))


def test_predicate_equivalence_sample():
    bad, far = predicate_disagreements(20_000, seed=3)
    assert far == 0
