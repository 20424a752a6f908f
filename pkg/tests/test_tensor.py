import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from srdcnn.errors import DimensionError
from srdcnn.tensor import matmul, mean_axis, pad1d


def naive_matmul(a, b):
    M, K = len(a), len(a[0])
    P = len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(K)) for j in range(P)] for i in range(M)]


def naive_mean(x, axis):
    x = np.asarray(x)
    moved = np.moveaxis(x, axis, -1)
    out = np.empty(moved.shape[:-1])
    for idx in np.ndindex(out.shape):
        total = 0.0
        for v in moved[idx]:
            total += v
        out[idx] = total / moved.shape[-1]
    return out


def test_matmul_identity():
    np.testing.assert_array_equal(matmul(np.eye(2), [[1, 2], [3, 4]]), [[1, 2], [3, 4]])


def test_matmul_dot():
    assert matmul([[1, 2]], [[3], [4]]).tolist() == [[11.0]]


def test_matmul_matches_triple_loop(rng):
    a = rng.standard_normal((3, 4))
    b = rng.standard_normal((4, 2))
    np.testing.assert_allclose(matmul(a, b), naive_matmul(a.tolist(), b.tolist()), rtol=0, atol=1e-12)


def test_matmul_shape_error_names_shapes():
    with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 3\)"):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_associative(rng):
    for _ in range(20):
        m, k, p, q = rng.integers(1, 6, size=4)
        A, B, C = rng.standard_normal((m, k)), rng.standard_normal((k, p)), rng.standard_normal((p, q))
        np.testing.assert_allclose(matmul(matmul(A, B), C), matmul(A, matmul(B, C)), atol=1e-9)


@pytest.mark.parametrize("x, left, right, expected", [
    ([1, 2, 3], 0, 0, [1, 2, 3]),
    ([1, 2, 3], 1, 1, [0, 1, 2, 3, 0]),
    ([5], 0, 2, [5, 0, 0]),
])
def test_pad1d_examples(x, left, right, expected):
    assert pad1d(x, left, right).tolist() == expected


def test_pad1d_pads_time_axis_per_channel():
    out = pad1d([[1, 2], [3, 4]], 1, 2)
    assert out.tolist() == [[0, 1, 2, 0, 0], [0, 3, 4, 0, 0]]


def test_pad1d_negative_rejected():
    with pytest.raises(DimensionError):
        pad1d([1.0], -1, 0)


@given(arrays(np.float64, st.tuples(st.integers(1, 3), st.integers(1, 8)),
              elements=st.floats(-1e6, 1e6)),
       st.integers(0, 5), st.integers(0, 5))
def test_pad_then_slice_roundtrip(x, left, right):
    T = x.shape[1]
    np.testing.assert_array_equal(pad1d(x, left, right)[:, left:left + T], x)


def test_mean_axis_examples():
    assert mean_axis([2, 4, 6], 0) == 4
    assert mean_axis([[1, 3], [5, 7]], 1).tolist() == [2, 6]


def test_mean_axis_matches_naive(rng):
    x = rng.standard_normal((4, 5))
    for axis in (0, 1):
        np.testing.assert_allclose(mean_axis(x, axis), naive_mean(x, axis), atol=1e-12)


def test_mean_axis_out_of_range():
    with pytest.raises(DimensionError):
        mean_axis(np.ones((2, 2)), 2)


@settings(max_examples=50)
@given(st.floats(-1e3, 1e3), st.tuples(st.integers(1, 4), st.integers(1, 4)), st.integers(0, 1))
def test_mean_of_constant_is_constant(c, shape, axis):
    # exact for dyadic constants; general floats may round by one ulp
    c = np.float64(np.round(c * 8) / 8)
    assert np.all(mean_axis(np.full(shape, c), axis) == c)
