import math

import numpy as np
import pytest
from scipy.integrate import quad

from timeslit.pulse import Envelope, PulseParams, field_at, field_integral, vector_potential

W, F0 = 0.05, 0.075


@pytest.fixture
def flat_full():
    return PulseParams.from_cycles(W, F0, 1.0)


@pytest.fixture
def sin2():
    return PulseParams.from_cycles(W, F0, 2.0, Envelope.SIN_SQUARED)


def quad_a(p, t):
    """Oracle: -int_0^t F by adaptive quadrature, split at field extrema."""
    if t <= 0:
        return 0.0
    brk = [x for x in np.arange(1, 64) * (math.pi / (2 * p.omega)) if x < min(t, p.tau)]
    val, _ = quad(lambda s: field_at(p, s), 0.0, min(t, p.tau), points=brk or None,
                  limit=400, epsabs=1e-12, epsrel=1e-12)
    return -val


def test_field_examples(flat_full, sin2):
    assert field_at(flat_full, math.pi / (2 * W)) == pytest.approx(0.075, abs=1e-15)
    assert field_at(flat_full, -1.0) == 0.0
    assert field_at(sin2, sin2.tau / 2) == pytest.approx(0.0, abs=1e-15)


def test_field_zero_outside(flat_full, sin2):
    t = np.concatenate((np.linspace(-500, -1e-9, 50), np.linspace(sin2.tau + 1e-9, 2000, 50)))
    for p in (flat_full, sin2):
        assert np.all(field_at(p, t) == 0.0)


def test_vector_potential_examples():
    half = PulseParams.from_cycles(W, F0, 0.5)
    full = PulseParams.from_cycles(W, F0, 1.0)
    assert vector_potential(half, 0.0) == 0.0
    assert vector_potential(half, math.pi / W) == pytest.approx(-3.0, abs=1e-12)
    assert quad_a(half, math.pi / W) == pytest.approx(-3.0, abs=1e-10)
    assert vector_potential(full, 2 * math.pi / W) == pytest.approx(0.0, abs=1e-12)


def test_full_cycle_zero_net_transfer(flat_full):
    assert abs(vector_potential(flat_full, flat_full.tau)) < 1e-12
    assert abs(field_integral(flat_full, 0.0, flat_full.tau)) < 1e-12


@pytest.mark.parametrize("cycles,env", [(0.5, "flat"), (1.0, "flat"), (2.0, "sin2"), (1.3, "sin2")])
def test_vector_potential_matches_quadrature(cycles, env):
    p = PulseParams.from_cycles(W, F0, cycles, env)
    rng = np.random.default_rng(7)
    for t in rng.uniform(-20, p.tau + 50, 100):
        assert vector_potential(p, t) == pytest.approx(quad_a(p, t), abs=1e-10)


def test_vector_potential_clamped_after_pulse(sin2):
    end = vector_potential(sin2, sin2.tau)
    assert vector_potential(sin2, sin2.tau + 123.0) == end
    assert np.all(vector_potential(sin2, np.array([-5.0, -1.0])) == 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        PulseParams(0.0, 0.075, 10.0)
    with pytest.raises(ValueError):
        PulseParams(0.05, -1.0, 10.0)
    with pytest.raises(ValueError):
        PulseParams(0.05, 0.075, 0.0)
    with pytest.raises(ValueError):
        Envelope.parse("gaussian")
    p = PulseParams.from_cycles(W, F0, 2.0, "sin^2")
    assert p.envelope is Envelope.SIN_SQUARED
    assert p.tau == pytest.approx(4 * math.pi / W)  # exactly two cycles, not 251.0
    assert p.cycles == pytest.approx(2.0)
    assert p.quiver_momentum == pytest.approx(1.5)


def test_array_and_scalar_forms(flat_full):
    t = np.linspace(0, flat_full.tau, 7)
    arr = field_at(flat_full, t)
    assert isinstance(field_at(flat_full, 1.0), float)
    assert np.allclose(arr, [field_at(flat_full, x) for x in t])
