import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from hdmdc.errors import (
    ConstantChannel,
    DataError,
    MissingChannel,
    NonFiniteValue,
    NonUniformSampling,
    UpsamplingRequested,
    WindowTooLong,
)
from hdmdc.timeseries import (
    SplitSpec,
    Standardizer,
    TimeSeries,
    decimate,
    decimation_factor,
    draw_windows,
    full_factorial,
    load_csv,
    round_half_away,
    save_csv,
    split,
    standardize,
)


def test_round_half_away():
    assert [round_half_away(v) for v in (0.5, 1.5, 2.5, -0.5, -2.5, 2.4999)] == [1, 2, 3, -1, -3, 2]


class TestTimeSeries:
    def test_validation(self):
        with pytest.raises(DataError):
            TimeSeries(("a", "a"), 0, 0.1, np.zeros((2, 3)))
        with pytest.raises(DataError):
            TimeSeries(("a",), 0, 0.0, np.zeros(3))
        with pytest.raises(NonFiniteValue, match="'b'"):
            TimeSeries(("a", "b"), 0, 0.1, [[0, 1], [np.nan, 1]])

    def test_data_is_read_only_copy(self):
        raw = np.arange(4.0)
        ts = TimeSeries(("a",), 0, 1, raw)
        raw[0] = 99
        assert ts.data[0, 0] == 0
        with pytest.raises(ValueError):
            ts.data[0, 0] = 1

    def test_window_shifts_t0(self):
        ts = TimeSeries(("a",), 1.0, 0.5, np.arange(10.0))
        w = ts.window(4, 7)
        assert w.t0 == 3.0 and w.data.tolist() == [[4, 5, 6]]
        with pytest.raises(WindowTooLong):
            ts.window(5, 11)

    def test_select_missing(self):
        ts = TimeSeries(("a", "b"), 0, 1, np.zeros((2, 3)))
        assert ts.select(["b"]).channel_names == ("b",)
        with pytest.raises(MissingChannel):
            ts.select(["c"])


class TestCsv:
    def test_three_row_example(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("t,z\n0,0\n0.1,1\n0.2,2\n")
        ts = load_csv(p)
        assert ts.dt == pytest.approx(0.1)
        assert ts.data.tolist() == [[0, 1, 2]]

    def test_non_uniform(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("t,z\n0,0\n0.1,1\n0.25,2\n")
        with pytest.raises(NonUniformSampling, match="row"):
            load_csv(p)

    def test_missing_channel_named(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("t,z\n0,0\n0.1,1\n")
        with pytest.raises(MissingChannel, match="'x'"):
            load_csv(p, schema=["x"])

    def test_non_finite_named(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("t,z,y\n0,0,1\n0.1,1,nan\n0.2,1,1\n")
        with pytest.raises(NonFiniteValue, match="'y', row 3"):
            load_csv(p)

    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(3)
        ts = TimeSeries(("x", "M_bow"), 0.0, 0.01, rng.standard_normal((2, 2000)) * 1e3)
        save_csv(ts, tmp_path / "r.csv")
        back = load_csv(tmp_path / "r.csv")
        assert np.array_equal(back.data, ts.data)
        assert back.channel_names == ts.channel_names
        assert back.dt == pytest.approx(0.01, rel=1e-12)

    def test_schema_reorders(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("t,a,b\n0,1,2\n1,3,4\n")
        assert load_csv(p, ["b", "a"]).data.tolist() == [[2, 4], [1, 3]]


class TestStandardize:
    def test_hand_example(self):
        out, s = standardize(TimeSeries(("a",), 0, 1, [1.0, 2.0, 3.0]))
        assert np.allclose(out.data, [[-1, 0, 1]], atol=1e-15)
        assert s.std[0] == 1.0

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        ts = TimeSeries(("a", "b"), 0, 0.1, rng.normal(5, 3, (2, 100)))
        z, s = standardize(ts)
        assert np.allclose(s.invert(z).data, ts.data, rtol=1e-12, atol=0)

    def test_window_statistics_applied_to_all(self):
        rng = np.random.default_rng(1)
        x = np.concatenate([rng.normal(0, 1, 500), rng.normal(2, 1, 500)])
        ts = TimeSeries(("a",), 0, 1, x)
        z, s = standardize(ts, (0, 499))
        assert abs(z.data[0, :500].mean()) < 1e-10
        assert abs(z.data[0, :500].std(ddof=1) - 1) < 1e-10
        assert z.data[0, 500:].mean() > 1

    def test_constant_channel_rejected(self):
        with pytest.raises(ConstantChannel, match="'b'"):
            Standardizer.fit(TimeSeries(("a", "b"), 0, 1, [[1, 2, 3], [4, 4, 4]]))

    def test_dict_round_trip(self):
        s = Standardizer(("a",), np.array([1.5]), np.array([0.25]), (0.0, 2.0))
        back = Standardizer.from_dict(s.to_dict())
        assert back.channel_names == s.channel_names and back.fitted_on == s.fitted_on
        assert np.array_equal(back.mean, s.mean) and np.array_equal(back.std, s.std)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-1e3, 1e3), st.floats(1e-3, 1e3))
    @example(15, 656.0, 0.001)
    def test_idempotent(self, seed, loc, scale):
        x = np.random.default_rng(seed).normal(loc, scale, (3, 50))
        z, _ = standardize(TimeSeries(("a", "b", "c"), 0, 1, x))
        zz, _ = standardize(z)
        assert np.max(np.abs(zz.data - z.data)) < 1e-10


class TestDecimate:
    def test_reference_factor(self):
        assert decimation_factor(0.002, 32, 1.64) == 26
        ts = TimeSeries(("a",), 0, 0.002, np.sin(np.arange(5200) * 0.01))
        d = decimate(ts, 32, 1.64)
        assert d.dt == pytest.approx(0.052)
        assert d.t0 == ts.t0

    def test_factor_one_identity(self):
        ts = TimeSeries(("a",), 0, 0.1, np.arange(10.0))
        assert decimate(ts, 10, 1.0) is ts

    def test_upsampling_rejected(self):
        with pytest.raises(UpsamplingRequested):
            decimate(TimeSeries(("a",), 0, 0.1, np.arange(10.0)), 32, 1.0)

    def test_sinusoid_attenuation(self):
        dt = 0.01
        t = np.arange(20000) * dt
        ts = TimeSeries(("a",), 0, dt, np.sin(2 * np.pi * 0.5 * t))
        d = decimate(ts, 50, 2.0)  # factor 4
        assert round(d.dt / dt) == 4
        inner = d.data[0, 10:-10]
        assert 1 - np.max(np.abs(inner)) <= 2e-3

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(2, 8))
    def test_mean_preserved(self, seed, n_sines, factor):
        rng = np.random.default_rng(seed)
        dt, n = 0.01, 8000
        nyq = 0.5 / dt
        t = np.arange(n) * dt
        f = rng.uniform(0.05, nyq / 4, n_sines)
        x = 3.0 + np.sin(2 * np.pi * f[:, None] * t + rng.uniform(0, 6, n_sines)[:, None]).sum(0)
        d = decimate(TimeSeries(("a",), 0, dt, x), 100, factor * dt * 100)
        assert abs(d.data.mean() - x.mean()) <= 1e-3 * abs(x.mean())


class TestSplit:
    def test_exact_halves(self):
        ts = TimeSeries(("a",), 0, 1, np.arange(100.0))
        train, tests = split(ts, SplitSpec(0.5, 50, 1, 0))
        assert train.data[0].tolist() == list(range(50))
        assert tests[0].data[0].tolist() == list(range(50, 100))

    def test_deterministic(self):
        ts = TimeSeries(("a",), 0, 1, np.arange(1000.0))
        a = split(ts, SplitSpec(0.5, 40, 10, 7))[1]
        b = split(ts, SplitSpec(0.5, 40, 10, 7))[1]
        assert [w.t0 for w in a] == [w.t0 for w in b]
        assert all(w.t0 >= 500 and w.t0 + 39 <= 999 for w in a)

    def test_too_long(self):
        with pytest.raises(WindowTooLong):
            split(TimeSeries(("a",), 0, 1, np.arange(100.0)), SplitSpec(0.5, 60, 1, 0))

    def test_full_factorial(self):
        pairs = full_factorial(10, 10)
        assert len(pairs) == 100 and len(set(pairs)) == 100

    def test_draw_windows_region(self):
        ws = draw_windows([100, 300], 80, 20, seed=5, fraction=(0.5, 1.0))
        assert all(w.run == 1 and w.start >= 150 and w.start + 80 <= 300 for w in ws)
        assert ws == draw_windows([100, 300], 80, 20, seed=5, fraction=(0.5, 1.0))
