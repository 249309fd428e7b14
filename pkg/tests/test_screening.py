import numpy as np
import pytest
from hypothesis import given, strategies as st

from cosci.errors import CalibrationError, InputError
from cosci.merge_engine import FeatureScore
from cosci.screening import (DEFAULT_GRID, ThresholdSpec, calibrate_threshold,
                             detection_table, screen_fixed, simulate_scores)

scores_st = st.lists(st.floats(1e-6, 0.5), min_size=1, max_size=40)
alpha_st = st.floats(1e-6, 0.5)


def _neighbours(value, grid=DEFAULT_GRID):
    k = grid.index(value)
    return set(grid[max(k - 1, 0):k + 2])


# -- screen_fixed ----------------------------------------------------------

def test_screen_fixed_example():
    res = screen_fixed([0.5, 0.01, 0.3], 0.2)
    assert res.selected == {0, 2}
    assert res.alpha0_used == 0.2


def test_screen_fixed_above_max_is_empty():
    s = [0.5 * 0.9, 0.1, 0.3]
    assert screen_fixed(s, np.nextafter(max(s), 1.0)).selected == frozenset()


def test_screen_fixed_at_min_selects_all():
    s = [0.45, 0.1, 0.3]
    assert screen_fixed(s, 0.1).selected == {0, 1, 2}


def test_screen_fixed_accepts_feature_scores():
    s = [FeatureScore(0.4), FeatureScore(0.05)]
    assert screen_fixed(s, 0.2).selected == {0}


@pytest.mark.parametrize("alpha0", [0.0, -0.1, 0.51, float("nan")])
def test_screen_fixed_rejects_alpha(alpha0):
    with pytest.raises(InputError):
        screen_fixed([0.3], alpha0)


@given(scores_st, alpha_st, alpha_st)
def test_screen_nested(scores, a, b):
    lo, hi = sorted((a, b))
    assert screen_fixed(scores, hi).selected <= screen_fixed(scores, lo).selected


@given(scores_st, alpha_st)
def test_screen_selected_is_threshold_set(scores, a):
    res = screen_fixed(scores, a)
    assert res.selected == {j for j, s in enumerate(scores) if s >= a}


# -- ThresholdSpec ---------------------------------------------------------

def test_spec_normalizes_mode():
    assert ThresholdSpec("data-driven").mode == "data_driven"


@pytest.mark.parametrize("kwargs", [
    dict(mode="fixed"),
    dict(mode="bogus"),
    dict(mode="simulated", grid=(0.2, 0.1)),
    dict(mode="simulated", grid=(0.1, 0.6)),
    dict(mode="simulated", noise_family="nope"),
    dict(mode="simulated", detect_tolerance=1.0),
])
def test_spec_rejects(kwargs):
    with pytest.raises(InputError):
        ThresholdSpec(**kwargs)


# -- calibration -----------------------------------------------------------

def test_calibration_gaussian_2000():
    spec = ThresholdSpec("simulated", reps=100)
    assert calibrate_threshold(2000, spec, 7) in _neighbours(0.2)


def test_calibration_gaussian_10000():
    spec = ThresholdSpec("simulated", reps=100)
    assert calibrate_threshold(10_000, spec, 8) in _neighbours(0.05)


def test_calibration_fails_at_small_n_with_zero_tolerance():
    spec = ThresholdSpec("simulated", reps=100, detect_tolerance=0.0)
    with pytest.raises(CalibrationError) as err:
        calibrate_threshold(100, spec, 9)
    table = err.value.table
    assert set(table) == set(DEFAULT_GRID)
    assert table[0.25] > 0.0


def test_calibration_deterministic_and_thread_free():
    spec = ThresholdSpec("simulated", reps=60, noise_family="laplace")
    a = detection_table(300, spec, 4, threads=1)
    b = detection_table(300, spec, 4, threads=4)
    assert a == b
    assert calibrate_threshold(300, spec, 4, threads=1) == \
        calibrate_threshold(300, spec, 4, threads=3)


def test_detection_fraction_monotone_in_alpha():
    spec = ThresholdSpec("simulated", reps=100)
    table = detection_table(500, spec, 1)
    fracs = [table[a] for a in spec.grid]
    assert all(x >= y for x, y in zip(fracs, fracs[1:]))


def test_detection_rate_gaussian_500_matches_reference():
    # reference rate 0.67 at alpha 0.05; 3 sigma binomial slack at 100 reps
    spec = ThresholdSpec("simulated", reps=100)
    rate = detection_table(500, spec, 2)[0.05]
    assert abs(rate - 0.67) <= 3 * np.sqrt(0.67 * 0.33 / 100)


def test_calibration_requires_simulated_mode_and_reps():
    with pytest.raises(InputError):
        calibrate_threshold(100, ThresholdSpec("fixed", alpha0=0.2), 0)
    with pytest.raises(InputError):
        calibrate_threshold(100, ThresholdSpec("simulated", reps=49), 0)


def test_simulated_scores_in_range():
    s = simulate_scores(50, "cauchy", 30, 0, threads=1)
    assert s.shape == (30,)
    assert np.all((s > 0) & (s <= 0.5))


def test_simulate_scores_unknown_family():
    with pytest.raises(InputError):
        simulate_scores(50, "uniform", 10, 0)
