"""The SRDCNN network: (conv -> batch norm -> ReLU) x l, global average
pooling, a dense layer and softmax cross-entropy, trained with Adam on the
data loss plus an elastic-net penalty on conv and dense weights.
"""

import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import layers
from .errors import ConfigurationError, DataError, DimensionError
from .layers import BatchNormParams, ConvParams, DenseParams
from .optim import Adam
from .regularization import PenaltyConfig, elastic_grad, l1_penalty, l2_penalty
from .tensor import as_tensor

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hyperparameters:
    epochs: int = 1000
    num_layers: int = 5
    kernel_sizes: tuple = (32, 16, 8, 4, 2)
    filters: tuple = (32, 32, 32, 32, 32)
    alpha1: float = 0.01
    alpha2: float = 0.02
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    bn_eps: float = 1e-5
    bn_momentum: float = 0.1
    seed: int = 0
    batch_cap: int = 16
    batch_divisor: int = 10
    batch_basis: str = "length"  # "length": series length T; "instances": training-set size N
    bn_recalibrate: bool = True  # replace running statistics with training-set statistics after the last epoch

    def __post_init__(self):
        object.__setattr__(self, "kernel_sizes", tuple(int(k) for k in self.kernel_sizes))
        object.__setattr__(self, "filters", tuple(int(f) for f in self.filters))
        if not (len(self.kernel_sizes) == len(self.filters) == self.num_layers):
            raise ConfigurationError(
                f"{self.num_layers} layers but {len(self.kernel_sizes)} kernel sizes "
                f"and {len(self.filters)} filter counts"
            )
        counts = (self.epochs, self.num_layers, self.batch_cap, self.batch_divisor,
                  *self.kernel_sizes, *self.filters)
        if any(c < 1 for c in counts):
            raise ConfigurationError("all counts in Hyperparameters must be positive")
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ConfigurationError("penalty factors must be nonnegative")
        if self.batch_basis not in ("length", "instances"):
            raise ConfigurationError(f"batch_basis must be 'length' or 'instances', got {self.batch_basis!r}")

    @property
    def penalty(self):
        return PenaltyConfig(self.alpha1, self.alpha2)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["kernel_sizes"] = list(self.kernel_sizes)
        d["filters"] = list(self.filters)
        return d

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(f"unknown hyperparameters: {sorted(unknown)}")
        return cls(**d)


@dataclass
class SrdcnnModel:
    convs: list
    bns: list
    dense: DenseParams
    label_map: np.ndarray  # original label of each class index
    hp: Hyperparameters
    series_length: int

    @property
    def n_classes(self):
        return len(self.label_map)

    def params(self):
        """Trainable arrays by name. The arrays are the model's own storage."""
        out = {}
        for i, (conv, bn) in enumerate(zip(self.convs, self.bns)):
            out[f"conv{i}.weight"] = conv.weight
            out[f"conv{i}.bias"] = conv.bias
            out[f"bn{i}.gamma"] = bn.gamma
            out[f"bn{i}.beta"] = bn.beta
        out["dense.weight"] = self.dense.weight
        out["dense.bias"] = self.dense.bias
        return out

    def buffers(self):
        out = {}
        for i, bn in enumerate(self.bns):
            out[f"bn{i}.running_mean"] = bn.running_mean
            out[f"bn{i}.running_var"] = bn.running_var
        return out

    def blocks(self):
        """Every stored array (parameters then running statistics), in checkpoint order."""
        out = self.params()
        out.update(self.buffers())
        return out

    def regularized(self):
        return [k for k in self.params() if k.endswith(".weight")]

    def n_parameters(self):
        return sum(a.size for a in self.params().values())

    def copy(self):
        return SrdcnnModel(
            convs=[ConvParams(c.weight.copy(), c.bias.copy()) for c in self.convs],
            bns=[dataclasses.replace(b, gamma=b.gamma.copy(), beta=b.beta.copy(),
                                     running_mean=b.running_mean.copy(),
                                     running_var=b.running_var.copy()) for b in self.bns],
            dense=DenseParams(self.dense.weight.copy(), self.dense.bias.copy()),
            label_map=self.label_map.copy(),
            hp=self.hp,
            series_length=self.series_length,
        )


@dataclass
class EpochRecord:
    epoch: int
    data_loss: float
    l1_penalty: float
    l2_penalty: float
    regularized_cost: float
    train_accuracy: float
    seconds: float


@dataclass
class TrainingHistory:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])


def compute_batch_size(count, hp=None, n_train=None):
    """``min(round(count / divisor), cap)`` clamped to ``[1, n_train]``; halves round up.

    ``n_train`` defaults to ``count``. :func:`train` passes the series length
    or the training-set size as ``count`` according to ``hp.batch_basis``.
    """
    hp = hp or Hyperparameters()
    n_train = count if n_train is None else n_train
    if n_train < 1:
        raise DataError("training set is empty")
    if count < 1:
        raise ConfigurationError("batch size basis must be positive")
    size = int(np.floor(count / hp.batch_divisor + 0.5))
    return max(1, min(size, hp.batch_cap, n_train))


def _glorot(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def build_model(n_classes, series_length, hp=None, seed=None, label_map=None):
    hp = hp or Hyperparameters()
    if n_classes < 2:
        raise ConfigurationError(f"need at least 2 classes, got {n_classes}")
    if series_length < 1:
        raise ConfigurationError("series length must be positive")
    seed = hp.seed if seed is None else seed
    rng = np.random.default_rng([seed, 0])
    convs, bns = [], []
    cin = 1
    for K, cout in zip(hp.kernel_sizes, hp.filters):
        w = _glorot(rng, (cout, cin, K), cin * K, cout * K)
        convs.append(ConvParams(w, np.zeros(cout)))
        bns.append(BatchNormParams.init(cout, hp.bn_eps, hp.bn_momentum))
        cin = cout
    dense = DenseParams(_glorot(rng, (cin, n_classes), cin, n_classes), np.zeros(n_classes))
    if label_map is None:
        label_map = np.arange(n_classes)
    label_map = np.asarray(label_map, dtype=np.int64)
    if label_map.shape != (n_classes,) or len(np.unique(label_map)) != n_classes:
        raise ConfigurationError("label_map must list one distinct label per class")
    return SrdcnnModel(convs, bns, dense, label_map, hp, int(series_length))


def _as_batch(batch):
    x = as_tensor(batch)
    if x.ndim == 1:
        x = x[None, None, :]
    elif x.ndim == 2:
        x = x[:, None, :]
    if x.ndim != 3 or x.shape[1] != 1:
        raise DimensionError(f"expected a batch of univariate series, got shape {x.shape}")
    if x.shape[2] < 1:
        raise DimensionError("series must have at least one sample")
    return x


def forward(model, batch, mode="eval"):
    """Run the network on ``batch`` ([B, T] or [B, 1, T]).

    Returns ``(logits, cache)``; ``cache`` is ``None`` in eval mode. In
    train mode batch statistics are used (and running statistics updated)
    except for single-sample batches, which normalize with running
    statistics.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    x = _as_batch(batch)
    if mode == "eval":
        bn_mode = "eval"
    else:
        bn_mode = "frozen" if x.shape[0] == 1 else "train"
    h = x
    trace = []
    for conv, bn in zip(model.convs, model.bns):
        z = layers.conv1d_forward(h, conv)
        y, bn_cache = layers.batchnorm_forward(z, bn, bn_mode)
        trace.append((h, bn_cache, y))
        h = layers.relu_forward(y)
    pooled = layers.gap_forward(h)
    logits = layers.dense_forward(pooled, model.dense)
    if mode == "eval":
        return logits, None
    return logits, (trace, h.shape[2], pooled)


def backward(model, cache, grad_logits):
    trace, T, pooled = cache
    grads = {}
    g, grads["dense.weight"], grads["dense.bias"] = layers.dense_backward(
        pooled, model.dense, grad_logits)
    g = layers.gap_backward(T, g)
    for i in reversed(range(len(model.convs))):
        h, bn_cache, y = trace[i]
        g = layers.relu_backward(y, g)
        g, grads[f"bn{i}.gamma"], grads[f"bn{i}.beta"] = layers.batchnorm_backward(
            bn_cache, model.bns[i], g)
        g, grads[f"conv{i}.weight"], grads[f"conv{i}.bias"] = layers.conv1d_backward(
            h, model.convs[i], g)
    return grads


@dataclass
class _BatchResult:
    data_loss: float
    l1_term: float
    l2_term: float
    grads: dict
    logits: np.ndarray

    @property
    def regularized_cost(self):
        return self.data_loss + self.l1_term + self.l2_term


def _evaluate_batch(model, batch, labels, cfg):
    logits, cache = forward(model, batch, "train")
    loss, grad_logits, _ = layers.softmax_xent(logits, labels)
    grads = backward(model, cache, grad_logits)
    params = model.params()
    l1 = l2 = 0.0
    for name in model.regularized():
        w = params[name]
        l1 += cfg.alpha1 * l1_penalty(w)
        l2 += cfg.alpha2 * l2_penalty(w)
        grads[name] += elastic_grad(w, cfg)
    ordered = {k: grads[k] for k in params}
    return _BatchResult(loss, l1, l2, ordered, logits)


def loss_and_grads(model, batch, labels, cfg=None):
    """Data loss ``J``, regularized cost ``J + a1*|w|_1 + a2*w.w/2`` and its gradients.

    ``labels`` are class indices. The forward pass runs in train mode, so
    the model's running statistics are updated.
    """
    cfg = cfg or model.hp.penalty
    r = _evaluate_batch(model, batch, labels, cfg)
    return r.data_loss, r.regularized_cost, r.grads


def train(dataset, hp=None, callback=None):
    """Fit a fresh model to ``dataset``; returns ``(model, history)``.

    ``callback(record)`` is called after every epoch.
    """
    hp = hp or Hyperparameters()
    X = dataset.series
    y = dataset.y
    if X.shape[0] == 0:
        raise DataError("training set is empty")
    if dataset.n_classes < 2:
        raise ConfigurationError("training needs at least two classes")
    N, T = X.shape
    model = build_model(dataset.n_classes, T, hp, label_map=dataset.label_map)
    opt = Adam(hp.lr, hp.beta1, hp.beta2, hp.eps_adam)
    cfg = hp.penalty
    batch_size = compute_batch_size(T if hp.batch_basis == "length" else N, hp, N)
    shuffle_rng = np.random.default_rng([hp.seed, 1])
    params = model.params()
    history = TrainingHistory()
    log.info("training on %d series of length %d, batch size %d", N, T, batch_size)
    for epoch in range(1, hp.epochs + 1):
        start = time.perf_counter()
        order = shuffle_rng.permutation(N)
        sums = np.zeros(4)
        correct = 0
        for lo in range(0, N, batch_size):
            idx = order[lo:lo + batch_size]
            r = _evaluate_batch(model, X[idx], y[idx], cfg)
            opt.step(params, r.grads)
            n = len(idx)
            sums += n * np.array([r.data_loss, r.l1_term, r.l2_term, r.regularized_cost])
            correct += int((r.logits.argmax(axis=1) == y[idx]).sum())
        J, l1, l2, J_hat = sums / N
        record = EpochRecord(epoch, J, l1, l2, J_hat, correct / N, time.perf_counter() - start)
        history.records.append(record)
        if callback is not None:
            callback(record)
        if epoch == 1 or epoch % 100 == 0:
            log.debug("epoch %d: J=%.5f J_hat=%.5f acc=%.4f", epoch, J, J_hat, record.train_accuracy)
    if hp.bn_recalibrate:
        recalibrate_batchnorm(model, X)
    return model, history


def recalibrate_batchnorm(model, series, chunk=256):
    """Set every BN layer's running statistics to the population mean and
    variance of its input over ``series``, under the current weights.

    Layers are processed in order, so each layer sees inputs normalized
    with the already recalibrated statistics of the layers below it, which
    is what eval mode will see.
    """
    x = _as_batch(series)
    for i, (conv, bn) in enumerate(zip(model.convs, model.bns)):
        count = 0
        mean = np.zeros(conv.weight.shape[0])
        m2 = np.zeros_like(mean)
        for lo in range(0, x.shape[0], chunk):
            h = x[lo:lo + chunk]
            for c, b in zip(model.convs[:i], model.bns[:i]):
                h = layers.relu_forward(layers.batchnorm_forward(layers.conv1d_forward(h, c), b, "eval")[0])
            z = layers.conv1d_forward(h, conv)
            n = z.shape[0] * z.shape[2]
            zm = z.mean(axis=(0, 2))
            zm2 = ((z - zm[None, :, None]) ** 2).sum(axis=(0, 2))
            # pairwise (Chan) merge of chunk moments
            delta = zm - mean
            total = count + n
            mean = mean + delta * (n / total)
            m2 = m2 + zm2 + delta ** 2 * (count * n / total)
            count = total
        bn.running_mean = mean
        bn.running_var = m2 / count


def predict_indices(model, series, chunk=256):
    x = _as_batch(series)
    out = []
    for lo in range(0, x.shape[0], chunk):
        logits, _ = forward(model, x[lo:lo + chunk], "eval")
        out.append(logits.argmax(axis=1))
    return np.concatenate(out)


def predict(model, series):
    """Original label predicted for one series (argmax, ties to the lowest index)."""
    x = as_tensor(series)
    if x.ndim != 1:
        raise DimensionError(f"predict takes one series, got shape {x.shape}")
    return model.label_map[predict_indices(model, x)[0]].item()


def predict_labels(model, series):
    return model.label_map[predict_indices(model, series)]


def evaluate(model, test):
    if len(test) == 0:
        raise DataError("test set is empty")
    return float(np.mean(predict_labels(model, test.series) == test.labels))
