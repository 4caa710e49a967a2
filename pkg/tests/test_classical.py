import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timeslit.classical import (ReleaseEvent, classical_support, drift_momentum, final_momentum,
                                interference_partner, momentum_trajectory)
from timeslit.pulse import PulseParams

W, F0 = 0.05, 0.075
T = 2 * math.pi / W
FULL = PulseParams.from_cycles(W, F0, 1.0)
HALF = PulseParams.from_cycles(W, F0, 0.5)


def test_drift_examples():
    assert drift_momentum(FULL, math.pi / (2 * W), T) == pytest.approx(1.5, abs=1e-12)
    assert drift_momentum(FULL, 40.0, 40.0) == 0.0
    assert drift_momentum(FULL, math.pi / W, T) == pytest.approx(3.0, abs=1e-12)


def test_drift_rejects_sin2_and_bad_times():
    with pytest.raises(ValueError):
        drift_momentum(PulseParams.from_cycles(W, F0, 2.0, "sin2"), 1.0, 2.0)
    with pytest.raises(ValueError):
        drift_momentum(FULL, 10.0, 5.0)
    with pytest.raises(ValueError):
        drift_momentum(FULL, -1.0, 5.0)


def test_drift_is_clamped_after_pulse():
    assert drift_momentum(FULL, 30.0, T + 500.0) == drift_momentum(FULL, 30.0, T)


def test_partner_examples():
    assert interference_partner(math.pi / (2 * W), W) == pytest.approx(3 * math.pi / (2 * W))
    assert interference_partner(math.pi / W, W) == pytest.approx(math.pi / W)
    t1 = 0.3 * T
    t2 = interference_partner(t1, W)
    assert abs(drift_momentum(FULL, t1, T) - drift_momentum(FULL, t2, T)) < 1e-12
    with pytest.raises(ValueError):
        interference_partner(T + 1.0, W)


def test_pair_symmetry_1000_samples():
    t1 = np.random.default_rng(3).uniform(0, T, 1000)
    t2 = interference_partner(t1, W)
    assert np.max(np.abs(drift_momentum(FULL, t1, T) - drift_momentum(FULL, t2, T))) < 1e-12


def test_support_examples():
    assert tuple(classical_support(FULL, 1)) == pytest.approx((-3.0, 0.0))
    assert tuple(classical_support(FULL, 2)) == pytest.approx((0.0, 3.0))
    assert classical_support(FULL).e_max == pytest.approx(4.5)
    assert tuple(classical_support(HALF)) == pytest.approx((-3.0, 0.0))


def test_range_of_final_momenta():
    t0 = np.linspace(0, T, 2001)
    p_full = drift_momentum(FULL, t0, T)
    assert p_full.min() >= -1e-12 and p_full.max() <= 3.0 + 1e-12
    t0h = np.linspace(0, T / 2, 2001)
    p_half = drift_momentum(HALF, t0h, T / 2)
    assert p_half.min() >= -3.0 - 1e-12 and p_half.max() <= 1e-12


def test_quiver_extremes_for_peak_release():
    t0 = math.pi / (2 * W)
    t = np.linspace(t0, T, 4001)
    p = drift_momentum(FULL, t0, t)
    assert p.max() == pytest.approx(1.5, abs=1e-9)
    assert p.min() == pytest.approx(-1.5, abs=1e-6)


def test_release_event_and_general_envelope():
    ev = ReleaseEvent.at(FULL, 0.3 * T)
    assert ev.p_final == pytest.approx(drift_momentum(FULL, 0.3 * T, T), abs=1e-12)
    s2 = PulseParams.from_cycles(W, F0, 2.0, "sin2")
    traj = momentum_trajectory(s2, 50.0, np.array([10.0, 50.0, s2.tau]))
    assert traj[0] == 0.0 and traj[1] == 0.0
    assert traj[2] == pytest.approx(final_momentum(s2, 50.0))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_flat_closed_form_matches_vector_potential(a, b):
    t0, t = sorted((a * T, b * T))
    expected = (F0 / W) * (math.cos(W * t) - math.cos(W * t0))
    assert drift_momentum(FULL, t0, t) == pytest.approx(expected, abs=1e-12)
