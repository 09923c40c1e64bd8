import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdmdc.errors import DataError, InsufficientHistory, LengthMismatch, WrongHistoryLength
from hdmdc.hankel import EmbeddingDims, augment_state, build_embedding
from hdmdc.timeseries import TimeSeries


def test_hand_enumerated_blocks():
    x = np.array([[10.0, 20, 30, 40, 50]])
    snaps = build_embedding(x, None, EmbeddingDims(1, 0, 4, 1, 0), start_index=1)
    b = snaps.blocks()
    assert b["X"].tolist() == [[20, 30, 40]]
    assert b["S"].tolist() == [[10, 20, 30]]
    assert b["X'"].tolist() == [[30, 40, 50]]
    assert b["S'"].tolist() == [[20, 30, 40]]
    assert b["U"].shape == (0, 3) and b["Z"].shape == (0, 3)


def test_no_delays_is_plain_dmdc():
    rng = np.random.default_rng(0)
    x, u = rng.standard_normal((3, 20)), rng.standard_normal((2, 20))
    snaps = build_embedding(x, u, EmbeddingDims(3, 2, 10, 0, 0))
    assert np.array_equal(snaps.Yhat, np.vstack([x[:, :9], u[:, :9]]))
    assert np.array_equal(snaps.Xhat_prime, x[:, 1:10])


def test_dimensions():
    rng = np.random.default_rng(1)
    snaps = build_embedding(rng.standard_normal((2, 30)), rng.standard_normal((1, 30)),
                            EmbeddingDims(2, 1, 10, 2, 1))
    assert snaps.Yhat.shape == (8, 9)
    assert snaps.Xhat_prime.shape == (6, 9)


def test_newest_block_first_with_input():
    x = np.arange(10.0)[None, :]
    u = 100 + np.arange(10.0)[None, :]
    snaps = build_embedding(x, u, EmbeddingDims(1, 1, 5, 1, 2))
    # default start is max(s, z) = 2
    assert snaps.Yhat[:, 0].tolist() == [2, 1, 102, 101, 100]
    assert snaps.Xhat_prime[:, 0].tolist() == [3, 2]


def test_errors():
    x = np.zeros((1, 10))
    with pytest.raises(InsufficientHistory):
        build_embedding(x, None, EmbeddingDims(1, 0, 4, 2, 0), start_index=1)
    with pytest.raises(LengthMismatch):
        build_embedding(x, None, EmbeddingDims(1, 0, 9, 2, 0))
    with pytest.raises(LengthMismatch):
        build_embedding(np.zeros((2, 10)), None, EmbeddingDims(1, 0, 4, 0, 0))
    with pytest.raises(DataError):
        EmbeddingDims(1, 0, 3, 2, 0)


def test_misaligned_series():
    a = TimeSeries(("x",), 0.0, 0.1, np.arange(10.0))
    b = TimeSeries(("u",), 0.1, 0.1, np.arange(10.0))
    with pytest.raises(LengthMismatch):
        build_embedding(a, b, EmbeddingDims(1, 1, 4, 0, 0))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2), st.integers(0, 4), st.integers(0, 4),
       st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_hankel_and_shift_structure(N, Q, s, z, extra, seed):
    m = max(s, z) + 2 + extra
    n = max(s, z) + m + 3
    rng = np.random.default_rng(seed)
    x, u = rng.standard_normal((N, n)), rng.standard_normal((Q, n))
    d = EmbeddingDims(N, Q, m, s, z)
    snaps = build_embedding(x, u if Q else None, d)
    b = snaps.blocks()
    assert snaps.Yhat.shape == (N * (s + 1) + Q * (z + 1), m - 1)
    assert snaps.Xhat_prime.shape == (N * (s + 1), m - 1)
    # anti-diagonal constancy of the delayed blocks
    S = np.vstack([b["X"], b["S"]]).reshape(s + 1, N, m - 1)
    assert np.array_equal(S[1:, :, 1:], S[:-1, :, :-1])
    if Q:
        Z = np.vstack([b["U"], b["Z"]]).reshape(z + 1, Q, m - 1)
        assert np.array_equal(Z[1:, :, 1:], Z[:-1, :, :-1])
    # X' is the state part of Y shifted by one column
    assert np.array_equal(snaps.Xhat_prime[:, :-1], snaps.Yhat[:d.state_rows, 1:])


class TestAugmentState:
    def test_identity_without_delays(self):
        assert augment_state([[1.0, 2.0]], s=0).tolist() == [1.0, 2.0]

    def test_scalar_history(self):
        assert augment_state([3.0, 2.0, 1.0], s=2).tolist() == [3.0, 2.0, 1.0]

    def test_first_block_is_current(self):
        h = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        assert augment_state(h, s=2)[:2].tolist() == [1.0, 2.0]

    def test_wrong_length(self):
        with pytest.raises(WrongHistoryLength):
            augment_state([1.0, 2.0], s=2)


def test_dump_csv(tmp_path):
    snaps = build_embedding(np.arange(6.0)[None, :], None, EmbeddingDims(1, 0, 4, 1, 0))
    snaps.dump_csv(tmp_path)
    assert np.array_equal(np.loadtxt(tmp_path / "Yhat.csv", delimiter=","), snaps.Yhat)
