import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdmdc.errors import ConstantReference, ShapeMismatch
from hdmdc.metrics import (
    ammae_per_channel,
    anrmse,
    eps_t,
    evaluate,
    nammae,
    nrmse_per_channel,
)
from hdmdc.timeseries import TimeSeries

seeds = st.integers(0, 2**32 - 1)


def rand(seed, shape=(3, 200)):
    return np.random.default_rng(seed).standard_normal(shape)


def test_perfect_prediction_is_zero():
    r = rand(0)
    assert anrmse(r, r) == 0 and nammae(r, r) == 0
    assert np.all(eps_t(r, r).data == 0)


def test_white_reference_zero_prediction():
    r = rand(1, (1, 200_000))
    assert anrmse(np.zeros_like(r), r) == pytest.approx(1.0, abs=1e-3)


def test_constant_offset_nammae():
    r = rand(2, (1, 300))
    sd = r.std(ddof=1)
    for c in (0.3, -1.7):
        assert abs(nammae(r + c, r) - abs(c) / sd) < 1e-12
        assert abs(nammae(r + c, r, k=2.0) - abs(c) / (2 * sd)) < 1e-12


def test_time_reversal_ignored_by_nammae():
    r = rand(3, (2, 100))
    assert nammae(r[:, ::-1], r) == 0


def test_single_channel_eps():
    r = rand(4, (1, 50))
    p = r + rand(5, (1, 50))
    expected = np.abs(p - r)[0] / (1.5 * r.std(ddof=1))
    assert np.max(np.abs(eps_t(p, r, 1.5).data[0] - expected)) < 1e-12


def test_eps_carries_reference_timing():
    ref = TimeSeries(("a", "b"), 2.0, 0.1, rand(6, (2, 30)))
    e = eps_t(ref.with_data(rand(7, (2, 30))), ref)
    assert e.t0 == 2.0 and e.dt == 0.1 and e.channel_names == ("eps",)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_anrmse_from_per_channel_errors(seed):
    r, p = rand(seed), rand(seed + 1)
    sd = r.std(axis=1, ddof=1)
    per = np.abs(p - r) / sd[:, None]
    assert abs(anrmse(p, r) - np.mean(np.sqrt(np.mean(per ** 2, axis=1)))) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_eps_rms_bounded_by_mean_nrmse(seed):
    # the RMS of a channel average never exceeds the average of channel RMS values
    r, p = rand(seed), rand(seed + 1)
    lhs = np.mean(eps_t(p, r).data[0] ** 2)
    assert lhs <= np.mean(nrmse_per_channel(p, r)) ** 2 + 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_nammae_permutation_invariant(seed):
    r, p = rand(seed), rand(seed + 1)
    perm = np.random.default_rng(seed).permutation(r.shape[1])
    assert abs(nammae(p[:, perm], r[:, perm]) - nammae(p, r)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds, st.floats(0.01, 100), st.floats(-100, 100))
def test_affine_invariance(seed, alpha, beta):
    r, p = rand(seed), rand(seed + 1)
    assert anrmse(alpha * p + beta, alpha * r + beta) == pytest.approx(anrmse(p, r), rel=1e-9)
    assert nammae(alpha * p + beta, alpha * r + beta) == pytest.approx(nammae(p, r), rel=1e-9)


def test_ammae_hand_example():
    r = np.array([[0.0, 1.0, 2.0]])
    p = np.array([[1.0, 1.0, 1.0]])
    # |1 - 0| + |1 - 2| over 2 SD, SD = 1
    assert ammae_per_channel(p, r)[0] == 1.0


def test_errors():
    with pytest.raises(ShapeMismatch):
        anrmse(np.zeros((2, 5)), np.ones((2, 6)))
    with pytest.raises(ShapeMismatch):
        anrmse([[1.0]], [[1.0]])
    with pytest.raises(ConstantReference):
        anrmse(rand(0, (2, 5)), np.vstack([rand(1, (1, 5)), np.ones((1, 5))]))


def test_evaluate_report():
    ref = TimeSeries(("x", "M_bow"), 0, 0.1, rand(8, (2, 40)))
    pred = ref.with_data(ref.data + np.array([[0.01], [1.0]]))
    rep = evaluate(pred, ref)
    assert rep.worst_variable == "M_bow"
    assert rep.anrmse == pytest.approx(anrmse(pred, ref), abs=1e-15)
    sub = evaluate(pred, ref, channels=("x",))
    assert list(sub.per_variable) == ["x"]
    with pytest.raises(ShapeMismatch):
        evaluate(pred, TimeSeries(("x", "y"), 0, 0.1, ref.data))
