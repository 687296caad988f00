import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wastefree.core import (
    AllWeightsZero,
    NormConstAccumulator,
    WeightedSample,
    accumulate_norm_const,
    ess,
    logsumexp,
    normalize_log_weights,
)

finite_logw = st.lists(st.floats(-50, 50), min_size=1, max_size=60)


def test_normalize_equal():
    W, lm = normalize_log_weights([0.0, 0.0, 0.0])
    np.testing.assert_allclose(W, [1 / 3] * 3, rtol=1e-15)
    assert lm == pytest.approx(0.0, abs=1e-15)


def test_normalize_single_survivor():
    W, lm = normalize_log_weights([-np.inf, 0.0, -np.inf])
    np.testing.assert_array_equal(W, [0.0, 1.0, 0.0])
    assert lm == pytest.approx(-math.log(3), rel=1e-14)


def test_normalize_hand_value():
    W, lm = normalize_log_weights([0.0, math.log(3)])
    np.testing.assert_allclose(W, [0.25, 0.75], rtol=1e-14)
    assert lm == pytest.approx(math.log(2), rel=1e-14)


def test_all_minus_inf_raises():
    with pytest.raises(AllWeightsZero):
        normalize_log_weights([-np.inf, -np.inf])


def test_logsumexp_rejects_empty_and_nan():
    with pytest.raises(AllWeightsZero):
        logsumexp([])
    with pytest.raises(ValueError):
        logsumexp([0.0, np.nan])


def test_logsumexp_large_values():
    assert logsumexp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2))


@settings(max_examples=200, deadline=None)
@given(finite_logw, st.floats(-1e3, 1e3))
def test_shift_invariance(lw, c):
    W1, m1 = normalize_log_weights(lw)
    W2, m2 = normalize_log_weights(np.asarray(lw) + c)
    np.testing.assert_allclose(W1, W2, atol=1e-10)
    assert m2 - m1 == pytest.approx(c, abs=1e-10 * max(1.0, abs(c)))


@settings(max_examples=200, deadline=None)
@given(finite_logw)
def test_weights_sum_to_one_and_ess_bounds(lw):
    W, _ = normalize_log_weights(lw)
    assert abs(W.sum() - 1.0) < 1e-12
    assert np.all((W >= 0) & (W <= 1))
    e = ess(W)
    assert 1.0 - 1e-9 <= e <= len(W) * (1 + 1e-9)


def test_ess_examples():
    assert ess(np.full(100, 0.01)) == pytest.approx(100.0)
    assert ess([1.0, 0.0, 0.0, 0.0]) == pytest.approx(1.0)
    assert ess([0.5, 0.25, 0.25]) == pytest.approx(1 / 0.375)


def test_weighted_sample():
    s = WeightedSample(np.arange(3.0), np.array([0.0, math.log(3), -np.inf]))
    assert s.N == 3
    np.testing.assert_allclose(s.weights, [0.25, 0.75, 0.0])
    assert s.log_mean_weight == pytest.approx(math.log(4 / 3))
    assert s.ess == pytest.approx(1 / (0.25**2 + 0.75**2))
    u = WeightedSample.uniform(np.zeros((5, 2)))
    assert u.ess == pytest.approx(5.0)


def test_weighted_sample_validation():
    with pytest.raises(ValueError):
        WeightedSample(np.zeros(3), np.zeros(2))
    with pytest.raises(AllWeightsZero):
        WeightedSample(np.zeros(2), np.full(2, -np.inf))


def test_accumulate():
    acc = accumulate_norm_const(NormConstAccumulator(), 0.0)
    assert acc.log_L == 0.0
    acc = accumulate_norm_const(NormConstAccumulator(log_L=-1.0, per_step_log_ell=(-1.0,)), -0.5)
    assert acc.log_L == -1.5
    assert acc.per_step_log_ell == (-1.0, -0.5)
    with pytest.raises(ValueError):
        accumulate_norm_const(acc, np.nan)


@given(st.lists(st.floats(-100, 0), max_size=30))
def test_accumulator_sum_order(terms):
    acc = NormConstAccumulator()
    for x in terms:
        acc = accumulate_norm_const(acc, x)
    expected = 0.0
    for x in terms:
        expected += x
    assert acc.log_L == expected
