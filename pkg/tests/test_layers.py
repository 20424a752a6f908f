import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from srdcnn import layers
from srdcnn.errors import DegenerateBatchError, DimensionError, LabelError, UsageError
from srdcnn.layers import BatchNormParams, ConvParams, DenseParams


def central_diff(f, x, h=1e-5):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + h
        fp = f()
        x[idx] = old - h
        fm = f()
        x[idx] = old
        g[idx] = (fp - fm) / (2 * h)
    return g


def rel(a, b):
    return np.max(np.abs(a - b) / np.maximum(1e-8, np.abs(a) + np.abs(b)))


def conv(w, b=None):
    w = np.asarray(w, dtype=float)
    return ConvParams(w, np.zeros(w.shape[0]) if b is None else b)


# -- convolution ------------------------------------------------------------

def test_conv_identity_kernel():
    x = np.array([[[1.0, -2.0, 3.0, 0.5]]])
    np.testing.assert_array_equal(layers.conv1d_forward(x, conv([[[1.0]]])), x)


def test_conv_even_kernel_pads_right():
    # K=2: no left padding, one zero on the right
    out = layers.conv1d_forward(np.array([[[1.0, 2.0, 3.0]]]), conv([[[1.0, 1.0]]]))
    assert out.ravel().tolist() == [3.0, 5.0, 3.0]


def test_conv_bias_only():
    p = ConvParams(np.zeros((1, 1, 3)), np.array([0.5]))
    out = layers.conv1d_forward(np.array([[[4.0, -1.0, 2.0, 7.0]]]), p)
    assert out.ravel().tolist() == [0.5] * 4


def test_conv_channel_mismatch():
    with pytest.raises(DimensionError):
        layers.conv1d_forward(np.ones((1, 2, 5)), conv(np.ones((1, 1, 3))))


@pytest.mark.parametrize("K", [32, 16, 8, 4, 2])
@pytest.mark.parametrize("T", [1, 2, 5, 24, 40])
def test_conv_same_length(K, T, rng):
    x = rng.standard_normal((2, 3, T))
    assert layers.conv1d_forward(x, conv(rng.standard_normal((4, 3, K)))).shape == (2, 4, T)


def test_conv_backward_zero_grad(rng):
    x = rng.standard_normal((2, 1, 5))
    p = conv(rng.standard_normal((2, 1, 3)))
    for g in layers.conv1d_backward(x, p, np.zeros((2, 2, 5))):
        assert not g.any()


def test_conv_backward_identity_kernel(rng):
    x = rng.standard_normal((2, 1, 6))
    g = rng.standard_normal((2, 1, 6))
    gx, _, _ = layers.conv1d_backward(x, conv([[[1.0]]]), g)
    np.testing.assert_array_equal(gx, g)


def test_conv_backward_finite_differences(rng):
    x = rng.standard_normal((2, 1, 5))
    p = ConvParams(rng.standard_normal((2, 1, 3)), rng.standard_normal(2))
    R = rng.standard_normal((2, 2, 5))
    gx, gw, gb = layers.conv1d_backward(x, p, R)

    def f():
        return np.sum(layers.conv1d_forward(x, p) * R)

    assert rel(gx, central_diff(f, x)) < 1e-6
    assert rel(gw, central_diff(f, p.weight)) < 1e-6
    assert rel(gb, central_diff(f, p.bias)) < 1e-6
    np.testing.assert_allclose(gb, R.sum(axis=(0, 2)))


# -- batch norm -------------------------------------------------------------

def bn(channels=1, gamma=None, beta=None):
    p = BatchNormParams.init(channels)
    if gamma is not None:
        p.gamma = np.full(channels, float(gamma))
    if beta is not None:
        p.beta = np.full(channels, float(beta))
    return p


def test_bn_constant_channel_is_zero():
    y, _ = layers.batchnorm_forward(np.full((2, 1, 3), 4.2), bn(), "train")
    np.testing.assert_array_equal(y, 0.0)


def test_bn_two_values():
    x = np.array([[[-1.0, 1.0]]])
    y, _ = layers.batchnorm_forward(x, bn(), "train")
    np.testing.assert_allclose(y.ravel(), [-0.999995, 0.999995], atol=1e-6)
    np.testing.assert_allclose(y.ravel(), np.array([-1, 1]) / np.sqrt(1 + 1e-5), rtol=1e-15)


def test_bn_affine():
    y, _ = layers.batchnorm_forward(np.array([[[-1.0, 1.0]]]), bn(gamma=2, beta=3), "train")
    np.testing.assert_allclose(y.ravel(), [1.00001, 4.99999], atol=1e-6)


def test_bn_running_stats_update():
    p = bn()
    x = np.array([[[1.0, 3.0]], [[5.0, 7.0]]])  # mean 4, population var 5
    layers.batchnorm_forward(x, p, "train")
    np.testing.assert_allclose(p.running_mean, [0.9 * 0 + 0.1 * 4])
    np.testing.assert_allclose(p.running_var, [0.9 * 1 + 0.1 * 5])


def test_bn_eval_uses_running_stats():
    p = bn()
    p.running_mean[:] = 2.0
    p.running_var[:] = 4.0 - 1e-5
    y, cache = layers.batchnorm_forward(np.array([[[0.0, 2.0, 6.0]]]), p, "eval")
    assert cache is None
    np.testing.assert_allclose(y.ravel(), [-1.0, 0.0, 2.0], rtol=1e-12)


def test_bn_degenerate_batch():
    with pytest.raises(DegenerateBatchError):
        layers.batchnorm_forward(np.ones((1, 1, 1)), bn(), "train")


def test_bn_backward_rejects_eval_cache():
    _, cache = layers.batchnorm_forward(np.ones((2, 1, 2)), bn(), "eval")
    with pytest.raises(UsageError):
        layers.batchnorm_backward(cache, bn(), np.ones((2, 1, 2)))


def test_bn_backward_zero(rng):
    x = rng.standard_normal((3, 2, 4))
    p = bn(2)
    _, cache = layers.batchnorm_forward(x, p, "train")
    for g in layers.batchnorm_backward(cache, p, np.zeros_like(x)):
        assert not np.any(g)


def test_bn_backward_finite_differences(rng):
    x = rng.standard_normal((3, 2, 4))
    p = bn(2)
    p.gamma = rng.uniform(0.5, 2, 2)
    p.beta = rng.standard_normal(2)
    R = rng.standard_normal(x.shape)
    _, cache = layers.batchnorm_forward(x, p, "train")
    gx, gg, gb = layers.batchnorm_backward(cache, p, R)

    def f():
        return np.sum(layers.batchnorm_forward(x, p, "train")[0] * R)

    assert rel(gx, central_diff(f, x)) < 1e-6
    assert rel(gg, central_diff(f, p.gamma)) < 1e-6
    assert rel(gb, central_diff(f, p.beta)) < 1e-6


def test_bn_backward_projection_property(rng):
    x = rng.standard_normal((3, 2, 4))
    p = bn(2)
    _, cache = layers.batchnorm_forward(x, p, "train")
    gx, _, _ = layers.batchnorm_backward(cache, p, rng.standard_normal(x.shape))
    np.testing.assert_allclose(gx.sum(axis=(0, 2)), 0.0, atol=1e-12)


def test_bn_frozen_backward_finite_differences(rng):
    x = rng.standard_normal((1, 2, 5))
    p = bn(2)
    p.running_mean = rng.standard_normal(2)
    p.running_var = rng.uniform(0.5, 2, 2)
    p.gamma = rng.uniform(0.5, 2, 2)
    R = rng.standard_normal(x.shape)
    _, cache = layers.batchnorm_forward(x, p, "frozen")
    gx, gg, gb = layers.batchnorm_backward(cache, p, R)

    def f():
        return np.sum(layers.batchnorm_forward(x, p, "frozen")[0] * R)

    assert rel(gx, central_diff(f, x)) < 1e-6
    assert rel(gg, central_diff(f, p.gamma)) < 1e-6


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 4), st.integers(1, 3), st.integers(2, 6)),
              elements=st.floats(-100, 100)))
def test_bn_train_output_moments(x):
    p = bn(x.shape[1])
    y, _ = layers.batchnorm_forward(x, p, "train")
    var = x.var(axis=(0, 2))
    assert np.all(np.abs(y.mean(axis=(0, 2))) < 1e-9)
    np.testing.assert_allclose(y.var(axis=(0, 2)), var / (var + p.eps), atol=1e-6)


# -- relu / gap -------------------------------------------------------------

def test_relu():
    assert layers.relu_forward([-1.0, 0.0, 2.0]).tolist() == [0, 0, 2]
    assert layers.relu_backward([-1.0, 0.0, 2.0], np.array([5.0, 5.0, 5.0])).tolist() == [0, 0, 5]
    x = np.array([0.5, 1.5])
    np.testing.assert_array_equal(layers.relu_forward(x), x)
    np.testing.assert_array_equal(layers.relu_backward(x, np.array([3.0, 4.0])), [3.0, 4.0])


def test_gap():
    x = np.array([[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]])
    assert layers.gap_forward(x).tolist() == [[2.0, 5.0]]
    np.testing.assert_array_equal(layers.gap_forward(x[:, :, :1]), x[:, :, 0])
    assert layers.gap_backward(3, np.array([[6.0]])).ravel().tolist() == [2.0, 2.0, 2.0]


@given(arrays(np.float64, (2, 3, 4), elements=st.floats(-1e3, 1e3)), st.floats(0.01, 100))
def test_relu_gap_positively_homogeneous(x, c):
    np.testing.assert_allclose(layers.relu_forward(c * x), c * layers.relu_forward(x), rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(layers.gap_forward(c * x), c * layers.gap_forward(x), rtol=1e-12, atol=1e-9)


# -- dense / softmax --------------------------------------------------------

def test_dense_examples():
    x = np.array([[1.0, -2.0]])
    np.testing.assert_array_equal(layers.dense_forward(x, DenseParams(np.eye(2), np.zeros(2))), x)
    out = layers.dense_forward(np.array([[1.0, 2.0]]), DenseParams([[3.0], [4.0]], [1.0]))
    assert out.tolist() == [[12.0]]


def test_dense_shape_error():
    with pytest.raises(DimensionError):
        layers.dense_forward(np.ones((1, 3)), DenseParams(np.ones((2, 2)), np.zeros(2)))


def test_dense_backward_finite_differences(rng):
    x = rng.standard_normal((3, 4))
    p = DenseParams(rng.standard_normal((4, 2)), rng.standard_normal(2))
    R = rng.standard_normal((3, 2))
    gx, gw, gb = layers.dense_backward(x, p, R)

    def f():
        return np.sum(layers.dense_forward(x, p) * R)

    assert rel(gx, central_diff(f, x)) < 1e-6
    assert rel(gw, central_diff(f, p.weight)) < 1e-6
    assert rel(gb, central_diff(f, p.bias)) < 1e-6


def test_softmax_xent_symmetric():
    loss, grad, probs = layers.softmax_xent(np.array([[0.0, 0.0]]), np.array([0]))
    assert loss == pytest.approx(np.log(2), abs=1e-12)
    np.testing.assert_allclose(grad, [[-0.5, 0.5]])
    np.testing.assert_allclose(probs, [[0.5, 0.5]])


def test_softmax_xent_saturated():
    loss, _, _ = layers.softmax_xent(np.array([[100.0, 0.0]]), np.array([0]))
    assert 0 <= loss < 1e-10


def test_softmax_xent_finite_differences(rng):
    logits = rng.standard_normal((2, 3))
    labels = np.array([1, 2])
    _, g, _ = layers.softmax_xent(logits, labels)
    assert rel(g, central_diff(lambda: layers.softmax_xent(logits, labels)[0], logits)) < 1e-6


def test_softmax_xent_label_error():
    with pytest.raises(LabelError):
        layers.softmax_xent(np.zeros((1, 2)), np.array([2]))
    with pytest.raises(LabelError):
        layers.softmax_xent(np.zeros((1, 2)), np.array([-1]))


@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(2, 5)),
              elements=st.floats(-500, 500)))
def test_softmax_rows_are_distributions(logits):
    _, _, probs = layers.softmax_xent(logits, np.zeros(logits.shape[0], dtype=int))
    assert np.all((probs >= 0) & (probs <= 1))
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
