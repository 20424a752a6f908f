"""Forward and backward passes for the network's layer types.

Activations are laid out ``[batch, channel, time]``. Convolutions are
"same"-padded at stride 1 and use the cross-correlation convention; for a
kernel of length ``K`` the input is padded with ``(K - 1) // 2`` zeros on
the left and the remainder on the right, so even kernels lean left.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateBatchError, DimensionError, LabelError, UsageError
from .tensor import as_tensor


@dataclass
class ConvParams:
    weight: np.ndarray  # [Cout, Cin, K]
    bias: np.ndarray  # [Cout]

    def __post_init__(self):
        self.weight = as_tensor(self.weight)
        self.bias = as_tensor(self.bias)
        if self.weight.ndim != 3 or min(self.weight.shape) < 1:
            raise DimensionError(f"conv weight must be [Cout, Cin, K], got {self.weight.shape}")
        if self.bias.shape != (self.weight.shape[0],):
            raise DimensionError(
                f"conv bias shape {self.bias.shape} does not match {self.weight.shape[0]} filters"
            )

    @property
    def kernel_size(self):
        return self.weight.shape[2]


@dataclass
class BatchNormParams:
    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    eps: float = 1e-5
    momentum: float = 0.1

    @classmethod
    def init(cls, channels, eps=1e-5, momentum=0.1):
        return cls(
            gamma=np.ones(channels),
            beta=np.zeros(channels),
            running_mean=np.zeros(channels),
            running_var=np.ones(channels),
            eps=eps,
            momentum=momentum,
        )

    def __post_init__(self):
        for name in ("gamma", "beta", "running_mean", "running_var"):
            setattr(self, name, as_tensor(getattr(self, name)))
        if not self.eps > 0:
            raise ValueError("batch norm eps must be positive")
        if not 0 < self.momentum < 1:
            raise ValueError("batch norm momentum must lie in (0, 1)")


@dataclass
class DenseParams:
    weight: np.ndarray  # [F, C]
    bias: np.ndarray  # [C]

    def __post_init__(self):
        self.weight = as_tensor(self.weight)
        self.bias = as_tensor(self.bias)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise DimensionError(
                f"dense weight {self.weight.shape} and bias {self.bias.shape} are inconsistent"
            )


@dataclass
class BatchNormCache:
    mode: str
    xhat: np.ndarray
    inv_std: np.ndarray = field(repr=False)


def _check_3d(x, name="x"):
    x = as_tensor(x)
    if x.ndim != 3:
        raise DimensionError(f"{name} must be [batch, channel, time], got {x.shape}")
    return x


def conv1d_forward(x, p):
    x = _check_3d(x)
    if x.shape[1] != p.weight.shape[1]:
        raise DimensionError(
            f"conv1d: input has {x.shape[1]} channels, weight {p.weight.shape} expects {p.weight.shape[1]}"
        )
    if x.shape[2] < 1:
        raise DimensionError("conv1d: empty time axis")
    return kernels.conv1d_forward(x, p.weight, p.bias)


def conv1d_backward(x, p, grad_out):
    """Return ``(grad_x, grad_weight, grad_bias)``."""
    x = _check_3d(x)
    grad_out = _check_3d(grad_out, "grad_out")
    expected = (x.shape[0], p.weight.shape[0], x.shape[2])
    if x.shape[1] != p.weight.shape[1] or grad_out.shape != expected:
        raise DimensionError(
            f"conv1d_backward: x {x.shape}, weight {p.weight.shape}, grad_out {grad_out.shape}"
        )
    return kernels.conv1d_backward(x, p.weight, grad_out)


def batchnorm_forward(x, p, mode="train"):
    """Normalize each channel over (batch, time), then apply ``gamma``/``beta``.

    ``mode`` is ``"train"`` (batch statistics, running statistics updated in
    place), ``"eval"`` (running statistics, no cache) or ``"frozen"``
    (running statistics, but a cache is kept so gradients can flow; the
    trainer uses it for single-sample batches).
    Returns ``(y, cache)``.
    """
    x = _check_3d(x)
    if x.shape[1] != p.gamma.shape[0]:
        raise DimensionError(f"batchnorm: {x.shape[1]} channels vs {p.gamma.shape[0]} parameters")
    if mode == "train":
        n = x.shape[0] * x.shape[2]
        if n < 2:
            raise DegenerateBatchError(
                f"batchnorm: need at least 2 values per channel in train mode, got {n}"
            )
        mean = x.mean(axis=(0, 2))
        var = x.var(axis=(0, 2))
        p.running_mean = (1 - p.momentum) * p.running_mean + p.momentum * mean
        p.running_var = (1 - p.momentum) * p.running_var + p.momentum * var
    elif mode in ("eval", "frozen"):
        mean = p.running_mean
        var = p.running_var
    else:
        raise ValueError(f"unknown batchnorm mode {mode!r}")
    inv_std = 1.0 / np.sqrt(var + p.eps)
    xhat = (x - mean[None, :, None]) * inv_std[None, :, None]
    y = p.gamma[None, :, None] * xhat + p.beta[None, :, None]
    if mode == "eval":
        return y, None
    return y, BatchNormCache(mode, xhat, inv_std)


def batchnorm_backward(cache, p, grad_out):
    """Return ``(grad_x, grad_gamma, grad_beta)``."""
    if cache is None or not isinstance(cache, BatchNormCache):
        raise UsageError("batchnorm_backward needs the cache of a train-mode forward pass")
    grad_out = _check_3d(grad_out, "grad_out")
    xhat = cache.xhat
    if grad_out.shape != xhat.shape:
        raise DimensionError(f"batchnorm_backward: grad_out {grad_out.shape} vs cache {xhat.shape}")
    grad_beta = grad_out.sum(axis=(0, 2))
    grad_gamma = (grad_out * xhat).sum(axis=(0, 2))
    scale = (p.gamma * cache.inv_std)[None, :, None]
    if cache.mode == "frozen":
        return grad_out * scale, grad_gamma, grad_beta
    n = xhat.shape[0] * xhat.shape[2]
    grad_x = scale * (
        grad_out - grad_beta[None, :, None] / n - xhat * (grad_gamma[None, :, None] / n)
    )
    return grad_x, grad_gamma, grad_beta


def relu_forward(x):
    return np.maximum(as_tensor(x), 0.0)


def relu_backward(x, grad_out):
    return np.where(as_tensor(x) > 0, grad_out, 0.0)


def gap_forward(x):
    return _check_3d(x).mean(axis=2)


def gap_backward(T, grad_out):
    grad_out = as_tensor(grad_out)
    return np.repeat(grad_out[:, :, None] / T, T, axis=2)


def dense_forward(x, p):
    x = as_tensor(x)
    if x.ndim != 2 or x.shape[1] != p.weight.shape[0]:
        raise DimensionError(f"dense: input {x.shape} does not fit weight {p.weight.shape}")
    return x @ p.weight + p.bias


def dense_backward(x, p, grad_out):
    """Return ``(grad_x, grad_weight, grad_bias)``."""
    x = as_tensor(x)
    grad_out = as_tensor(grad_out)
    if grad_out.shape != (x.shape[0], p.weight.shape[1]) or x.shape[1] != p.weight.shape[0]:
        raise DimensionError(
            f"dense_backward: x {x.shape}, weight {p.weight.shape}, grad_out {grad_out.shape}"
        )
    return grad_out @ p.weight.T, x.T @ grad_out, grad_out.sum(axis=0)


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_xent(logits, labels):
    """Mean softmax cross-entropy over the batch.

    Returns ``(loss, grad_logits, probs)``; the gradient is the fused
    ``(probs - onehot) / B``.
    """
    logits = as_tensor(logits)
    labels = np.asarray(labels)
    if logits.ndim != 2:
        raise DimensionError(f"softmax_xent: logits must be [batch, classes], got {logits.shape}")
    B, C = logits.shape
    if labels.shape != (B,):
        raise DimensionError(f"softmax_xent: {labels.shape} labels for {B} rows")
    if not np.issubdtype(labels.dtype, np.integer) or labels.min() < 0 or labels.max() >= C:
        raise LabelError(f"labels must be class indices in [0, {C})")
    z = logits - logits.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    rows = np.arange(B)
    loss = float(np.mean(logsum - z[rows, labels]))
    probs = np.exp(z - logsum[:, None])
    grad = probs.copy()
    grad[rows, labels] -= 1.0
    grad /= B
    return loss, grad, probs
