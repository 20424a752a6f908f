"""Central finite-difference gradient checks for every layer and the full network."""

from dataclasses import dataclass, field

import numpy as np

from . import layers
from .errors import NumericError
from .layers import BatchNormParams, ConvParams, DenseParams
from .model import Hyperparameters, build_model, loss_and_grads
from .regularization import PenaltyConfig, elastic_grad, elastic_penalty


def rel_error(a, b):
    """Elementwise ``|a - b| / max(1e-8, |a| + |b|)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(1e-8, np.abs(a) + np.abs(b))


def numeric_gradient(f, params, h=1e-5, mask=None):
    """Central differences of the scalar ``f()`` w.r.t. each entry of ``params``.

    ``params`` is perturbed in place and restored. Entries where ``mask`` is
    False are left at zero.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    grad = np.zeros_like(params, dtype=np.float64)
    flat = params.reshape(-1)
    gflat = grad.reshape(-1)
    mflat = None if mask is None else np.asarray(mask).reshape(-1)
    for i in range(flat.size):
        if mflat is not None and not mflat[i]:
            continue
        old = flat[i]
        flat[i] = old + h
        fp = f()
        flat[i] = old - h
        fm = f()
        flat[i] = old
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericError(f"non-finite function value at coordinate {i}")
        gflat[i] = float((fp - fm) / (2 * h))
    return grad


@dataclass
class GradReport:
    block_errors: dict = field(default_factory=dict)
    threshold: float = 1e-4

    @property
    def max_error(self):
        return max(self.block_errors.values(), default=0.0)

    @property
    def passed(self):
        return self.max_error < self.threshold

    def render(self):
        width = max((len(k) for k in self.block_errors), default=5)
        lines = [f"{name:<{width}}  {err:.3e}" for name, err in self.block_errors.items()]
        status = "PASS" if self.passed else "FAIL"
        lines.append(f"{'max':<{width}}  {self.max_error:.3e}  {status} (threshold {self.threshold:g})")
        return "\n".join(lines)


def _compare(report, name, analytic, numeric, mask=None):
    err = rel_error(analytic, numeric)
    if mask is not None:
        err = err[mask]
    report.block_errors[name] = float(err.max()) if err.size else 0.0


def reference_cost(model, batch, labels, cfg=None, dtype=np.longdouble):
    """Regularized cost recomputed from scratch, by default in extended precision.

    Shares no code with the production forward pass. In float64 a bias
    feeding a train-mode batch norm has a true gradient of exactly zero,
    and the finite difference of the cost would only see rounding noise of
    about ``ulp / (2h)``; the wider mantissa keeps that noise far below the
    comparator floor.
    """
    cfg = cfg or model.hp.penalty
    x = np.asarray(batch, dtype=dtype)
    if x.ndim == 2:
        x = x[:, None, :]
    B, _, T = x.shape
    for conv, bn in zip(model.convs, model.bns):
        w = conv.weight.astype(dtype)
        K = w.shape[2]
        left = (K - 1) // 2
        xp = np.zeros((B, x.shape[1], T + K - 1), dtype=dtype)
        xp[:, :, left:left + T] = x
        z = np.zeros((B, w.shape[0], T), dtype=dtype) + conv.bias.astype(dtype)[None, :, None]
        for k in range(K):
            z += np.einsum("oc,bct->bot", w[:, :, k], xp[:, :, k:k + T])
        if B == 1:
            mean = bn.running_mean.astype(dtype)
            var = bn.running_var.astype(dtype)
        else:
            mean = z.mean(axis=(0, 2))
            var = ((z - mean[None, :, None]) ** 2).mean(axis=(0, 2))
        zhat = (z - mean[None, :, None]) / np.sqrt(var + dtype(bn.eps))[None, :, None]
        y = bn.gamma.astype(dtype)[None, :, None] * zhat + bn.beta.astype(dtype)[None, :, None]
        x = np.where(y > 0, y, dtype(0))
    pooled = x.mean(axis=2)
    logits = pooled @ model.dense.weight.astype(dtype) + model.dense.bias.astype(dtype)
    shift = logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(logits - shift).sum(axis=1)) + shift[:, 0]
    loss = (lse - logits[np.arange(B), np.asarray(labels)]).mean()
    params = model.params()
    for name in model.regularized():
        w = params[name].astype(dtype)
        loss += dtype(cfg.alpha1) * np.abs(w).sum() + dtype(cfg.alpha2) * (w * w).sum() / 2
    return loss


def gradient_check(model, batch, labels, threshold=1e-4, h=1e-5, cfg=None, precision="extended"):
    """Compare analytic gradients of the regularized cost with finite differences.

    Runs on a copy of ``model``. The finite differences use
    :func:`reference_cost` (``precision="extended"``) or the production
    forward pass (``precision="double"``). When the L1 factor is positive,
    weight coordinates within ``10*h`` of zero are skipped (the L1 kink).
    """
    model = model.copy()
    cfg = cfg or model.hp.penalty
    _, _, grads = loss_and_grads(model, batch, labels, cfg)
    params = model.params()
    regularized = set(model.regularized())

    if precision == "extended":
        def f():
            return reference_cost(model, batch, labels, cfg)
    elif precision == "double":
        def f():
            return loss_and_grads(model, batch, labels, cfg)[1]
    else:
        raise ValueError(f"unknown precision {precision!r}")

    report = GradReport(threshold=threshold)
    for name, p in params.items():
        mask = None
        if name in regularized and cfg.alpha1 > 0:
            mask = np.abs(p) > 10 * h
        num = numeric_gradient(f, p, h, mask)
        _compare(report, name, grads[name], num, mask)
    return report


def tiny_problem(seed=0, batch=4, length=8, cfg=None):
    """The small network and batch used by ``gradcheck --tiny``."""
    hp = Hyperparameters(num_layers=2, kernel_sizes=(3, 2), filters=(2, 2), seed=seed,
                         alpha1=0.01 if cfg is None else cfg.alpha1,
                         alpha2=0.02 if cfg is None else cfg.alpha2)
    model = build_model(2, length, hp)
    rng = np.random.default_rng([seed, 2])
    x = rng.standard_normal((batch, length))
    y = np.arange(batch) % 2
    return model, x, y


def layer_checks(seed=0, threshold=1e-4, h=1e-5):
    """Finite-difference check of each layer's backward pass on random inputs.

    Each layer output is contracted with a fixed random tensor to give a
    scalar. Returns a dict of ``GradReport`` by layer name.
    """
    rng = np.random.default_rng(seed)
    reports = {}

    # convolution, including a kernel longer than the series
    for K, T in ((3, 5), (4, 3)):
        x = rng.standard_normal((2, 2, T))
        p = ConvParams(rng.standard_normal((3, 2, K)), rng.standard_normal(3))
        R = rng.standard_normal((2, 3, T))
        gx, gw, gb = layers.conv1d_backward(x, p, R)

        def f():
            return float((layers.conv1d_forward(x, p) * R).sum())

        rep = GradReport(threshold=threshold)
        _compare(rep, "x", gx, numeric_gradient(f, x, h))
        _compare(rep, "weight", gw, numeric_gradient(f, p.weight, h))
        _compare(rep, "bias", gb, numeric_gradient(f, p.bias, h))
        reports[f"conv1d(K={K},T={T})"] = rep

    # batch norm in train mode
    x = rng.standard_normal((4, 2, 4))
    p = BatchNormParams.init(2)
    p.gamma = rng.uniform(0.5, 2.0, 2)
    p.beta = rng.standard_normal(2)
    R = rng.standard_normal(x.shape)
    _, cache = layers.batchnorm_forward(x, p, "train")
    gx, gg, gbeta = layers.batchnorm_backward(cache, p, R)

    def f():
        return float((layers.batchnorm_forward(x, p, "train")[0] * R).sum())

    rep = GradReport(threshold=threshold)
    _compare(rep, "x", gx, numeric_gradient(f, x, h))
    _compare(rep, "gamma", gg, numeric_gradient(f, p.gamma, h))
    _compare(rep, "beta", gbeta, numeric_gradient(f, p.beta, h))
    reports["batchnorm"] = rep

    # relu, away from the kink
    x = rng.standard_normal((2, 3, 5))
    x[np.abs(x) < 10 * h] = 0.5
    R = rng.standard_normal(x.shape)
    rep = GradReport(threshold=threshold)
    _compare(rep, "x", layers.relu_backward(x, R),
             numeric_gradient(lambda: float((layers.relu_forward(x) * R).sum()), x, h))
    reports["relu"] = rep

    # global average pooling
    x = rng.standard_normal((2, 3, 5))
    R = rng.standard_normal((2, 3))
    rep = GradReport(threshold=threshold)
    _compare(rep, "x", layers.gap_backward(5, R),
             numeric_gradient(lambda: float((layers.gap_forward(x) * R).sum()), x, h))
    reports["gap"] = rep

    # dense
    x = rng.standard_normal((3, 4))
    p = DenseParams(rng.standard_normal((4, 2)), rng.standard_normal(2))
    R = rng.standard_normal((3, 2))
    gx, gw, gb = layers.dense_backward(x, p, R)

    def f():
        return float((layers.dense_forward(x, p) * R).sum())

    rep = GradReport(threshold=threshold)
    _compare(rep, "x", gx, numeric_gradient(f, x, h))
    _compare(rep, "weight", gw, numeric_gradient(f, p.weight, h))
    _compare(rep, "bias", gb, numeric_gradient(f, p.bias, h))
    reports["dense"] = rep

    # softmax cross-entropy
    logits = rng.standard_normal((2, 3))
    labels = np.array([0, 2])
    _, g, _ = layers.softmax_xent(logits, labels)
    rep = GradReport(threshold=threshold)
    _compare(rep, "logits", g,
             numeric_gradient(lambda: layers.softmax_xent(logits, labels)[0], logits, h))
    reports["softmax_xent"] = rep
    return reports


def penalty_check(w, cfg=PenaltyConfig(), h=1e-5):
    """Finite-difference gradient of the elastic-net penalty alone, skipping the kink."""
    w = np.array(w, dtype=np.float64)
    mask = np.abs(w) > 10 * h
    num = numeric_gradient(lambda: elastic_penalty(w, cfg), w, h, mask)
    rep = GradReport()
    _compare(rep, "penalty", elastic_grad(w, cfg), num, mask)
    return rep
