import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdmdc.ensemble import (
    PriorSpec,
    aggregate,
    band,
    fit_members,
    fit_predict_ensemble,
    predict_members,
    sample_priors,
    sigma_band,
)
from hdmdc.errors import InvalidBounds, TooFewSurvivors
from hdmdc.estimator import HyperParams, Prediction, fit, horizon_steps, predict
from hdmdc.timeseries import TimeSeries

DT = 0.1
PERIOD = 3.2  # 32 steps per period


def oscillator(n=2400, seed=0, noise=1e-3):
    """Damped oscillator at PERIOD driven by a smooth random force."""
    rng = np.random.default_rng(seed)
    w = 2 * np.pi / PERIOD
    A = np.array([[1.0, DT], [-w * w * DT, 1.0 - 0.3 * DT]])
    B = np.array([0.0, DT])
    u = np.convolve(rng.standard_normal(n + 20), np.ones(20) / 20, mode="valid")[:n]
    x = np.zeros((2, n))
    for k in range(n - 1):
        x[:, k + 1] = A @ x[:, k] + B * u[k]
    x += noise * rng.standard_normal(x.shape)
    return TimeSeries(("p", "v"), 0.0, DT, x), TimeSeries(("u",), 0.0, DT, u)


def members_from(values, n=5):
    ts = TimeSeries(("a",), 0.0, 1.0, np.zeros(n))
    return [Prediction(ts.with_data(np.full(n, float(v))), (0.0, 0.0)) for v in values]


def dummy_draws(n):
    return [HyperParams(1.0, 0.0, 0.0, 1.0)] * n


class TestPriors:
    def test_defaults(self):
        p = PriorSpec.defaults(PERIOD)
        assert p.l_tr == (10 * PERIOD, 30 * PERIOD)
        assert p.l_dx == (0.5 * PERIOD, 1.5 * PERIOD)
        assert p.l_du == (2.5 * PERIOD, 7.5 * PERIOD)
        assert p.lam == (50.0, 150.0) and p.n_samples == 100

    def test_around_matches_defaults(self):
        center = HyperParams.defaults(PERIOD)
        a, b = PriorSpec.around(center), PriorSpec.defaults(PERIOD)
        for f in ("l_tr", "l_dx", "l_du", "lam"):
            assert getattr(a, f) == pytest.approx(getattr(b, f))

    def test_draws_within_bounds_and_deterministic(self):
        spec = PriorSpec.defaults(PERIOD, rng_seed=4)
        d = sample_priors(spec)
        assert d == sample_priors(spec)
        assert all(10 * PERIOD <= h.l_tr <= 30 * PERIOD and 50 <= h.lam <= 150 for h in d)
        assert d != sample_priors(PriorSpec.defaults(PERIOD, rng_seed=5))

    def test_nested_draws(self):
        small = sample_priors(PriorSpec.defaults(PERIOD, n_samples=10, rng_seed=2))
        big = sample_priors(PriorSpec.defaults(PERIOD, n_samples=20, rng_seed=2))
        assert big[:10] == small

    def test_collapsed_prior(self):
        spec = PriorSpec((5.0, 5.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0), n_samples=4)
        assert sample_priors(spec) == [HyperParams(5.0, 1.0, 2.0, 3.0)] * 4

    def test_invalid(self):
        with pytest.raises(InvalidBounds):
            PriorSpec((2.0, 1.0), (0, 1), (0, 1), (0, 1))
        with pytest.raises(InvalidBounds):
            PriorSpec((1.0, 2.0), (-1, 1), (0, 1), (0, 1))
        with pytest.raises(InvalidBounds):
            PriorSpec((1.0, float("inf")), (0, 1), (0, 1), (0, 1))
        with pytest.raises(InvalidBounds):
            PriorSpec((1.0, 2.0), (0, 1), (0, 1), (0, 1), n_samples=1)

    def test_dict_uses_lambda_key(self):
        d = PriorSpec.defaults(PERIOD).to_dict()
        assert d["lambda"] == [50.0, 150.0] and "lam" not in d


class TestAggregate:
    def test_quantile_band_arithmetic(self):
        ep = aggregate(members_from(range(100)), dummy_draws(100))
        lo, hi = band(ep, 0.95)
        # linear rule: positions 0.025 * 99 and 0.975 * 99, symmetric about 49.5
        assert np.allclose(lo.data, 2.475) and np.allclose(hi.data, 96.525)

    def test_zero_coverage_is_median(self):
        ep = aggregate(members_from([3, 1, 2, 10]), dummy_draws(4))
        lo, hi = band(ep, 0.0)
        assert np.all(lo.data == 2.5) and np.all(hi.data == 2.5)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30), st.floats(0, 0.99))
    def test_band_contains_median(self, values, coverage):
        ep = aggregate(members_from(values), dummy_draws(len(values)))
        lo, hi = band(ep, coverage)
        med = np.median(values)
        assert np.all(lo.data <= med + 1e-9) and np.all(med - 1e-9 <= hi.data)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        vals = rng.standard_normal(12)
        a = aggregate(members_from(vals), dummy_draws(12))
        b = aggregate(members_from(rng.permutation(vals)), dummy_draws(12))
        assert np.allclose(a.mean.data, b.mean.data, rtol=0, atol=1e-12)
        assert np.allclose(a.std.data, b.std.data, rtol=0, atol=1e-12)

    def test_std_zero_iff_identical(self):
        same = aggregate(members_from([1.7] * 6), dummy_draws(6))
        assert np.all(same.std.data == 0) and np.all(same.mean.data == 1.7)
        diff = aggregate(members_from([1.7] * 5 + [1.7000001]), dummy_draws(6))
        assert np.all(diff.std.data > 0)

    def test_sample_std(self):
        ep = aggregate(members_from([0, 2]), dummy_draws(2))
        assert np.allclose(ep.std.data, np.sqrt(2))
        lo, hi = sigma_band(ep, 1.0)
        assert np.allclose(hi.data - lo.data, 2 * np.sqrt(2))

    def test_too_few(self):
        with pytest.raises(TooFewSurvivors):
            aggregate(members_from([1.0]), dummy_draws(1))


class TestEnsemble:
    @pytest.fixture(scope="class")
    @classmethod
    def data(cls):
        state, inp = oscillator()
        return state.window(0, 1200), inp.window(0, 1200), state, inp

    def test_collapsed_prior_equals_deterministic(self, data):
        train_x, train_u, state, inp = data
        h = HyperParams.defaults(PERIOD)
        spec = PriorSpec(*((v, v) for v in (h.l_tr, h.l_dx, h.l_du, h.lam)), n_samples=3)
        model = fit(train_x, train_u, h)
        s = model.dims.s
        warm = state.window(1500 - s - 1, 1500)
        det = predict(model, inp, warm, 10 * PERIOD).series
        ep = fit_predict_ensemble(train_x, train_u, inp, warm, spec, 10 * PERIOD)
        assert np.array_equal(ep.mean.data, det.data)
        assert np.all(ep.std.data == 0)

    def test_band_covers_deterministic(self, data):
        train_x, train_u, state, inp = data
        spec = PriorSpec.defaults(PERIOD, rng_seed=1)
        warm_len = round(spec.upper().l_dx / DT) + 1
        warm = state.window(1500 - warm_len, 1500)
        ep = fit_predict_ensemble(train_x, train_u, inp, warm, spec, 15 * PERIOD)
        det = predict(fit(train_x, train_u, HyperParams.defaults(PERIOD)), inp, warm,
                      15 * PERIOD).series
        lo, hi = sigma_band(ep, 1.96)
        inside = (lo.data <= det.data) & (det.data <= hi.data)
        assert ep.n_members == 100 and not ep.failures
        assert inside.all(axis=0).mean() >= 0.99

    def test_nested_mean_convergence(self, data):
        train_x, train_u, state, inp = data
        big = PriorSpec.defaults(PERIOD, n_samples=100, rng_seed=3)
        draws = sample_priors(big)
        models, failures = fit_members(train_x, train_u, draws)
        warm_len = round(big.upper().l_dx / DT) + 1
        case = [(inp, state.window(1600 - warm_len, 1600))]
        n = horizon_steps(10 * PERIOD, DT)
        full = predict_members(models, draws, case, n, failures)[0]
        half = predict_members(models[:50], draws[:50], case, n)[0]
        diff = np.abs(full.mean.data - half.mean.data)
        assert np.mean(diff < 3 * full.std.data / np.sqrt(50)) >= 0.95

    def test_parallel_matches_serial(self, data):
        train_x, train_u, _, _ = data
        draws = sample_priors(PriorSpec.defaults(PERIOD, n_samples=4))
        a, _ = fit_members(train_x, train_u, draws, jobs=1)
        b, _ = fit_members(train_x, train_u, draws, jobs=2)
        assert [m.to_json() for m in a] == [m.to_json() for m in b]
