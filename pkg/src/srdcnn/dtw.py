"""Dynamic time warping distance and the 1-nearest-neighbour baseline.

The local cost is the squared difference and the accumulated cost is
returned without a final square root; this does not change the 1-NN
ranking. The warping window is a Sakoe-Chiba band of half-width
``ceil(window * max(m, n))`` (widened to ``|m - n|`` so the end cell is
always reachable). ``window=1`` is unconstrained DTW.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DataError, DimensionError


@dataclass(frozen=True)
class DtwConfig:
    window: float = 1.0
    squared: bool = True  # squared local cost; False uses |a - b|

    def __post_init__(self):
        if not 0.0 <= self.window <= 1.0:
            raise ValueError(f"window must be in [0, 1], got {self.window}")


def band_radius(m, n, window):
    return max(int(math.ceil(window * max(m, n))), abs(m - n))


def _series(x, name):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"{name} must be one series, got shape {x.shape}")
    if x.size == 0:
        raise DataError(f"{name} is empty")
    return x


def dtw_distance(a, b, cfg=DtwConfig()):
    a = _series(a, "a")
    b = _series(b, "b")
    band = band_radius(a.size, b.size, cfg.window)
    if cfg.squared:
        return float(kernels.dtw_distance(a, b, band))
    return float(_dtw_abs(a, b, band))


def _dtw_abs(a, b, band):
    m, n = a.size, b.size
    D = np.full((m + 1, n + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, m + 1):
        for j in range(max(1, i - band), min(n, i + band) + 1):
            D[i, j] = abs(a[i - 1] - b[j - 1]) + min(D[i - 1, j - 1], D[i - 1, j], D[i, j - 1])
    return D[m, n]


def distances_to(query, train_series, cfg=DtwConfig()):
    """DTW distance from ``query`` to every row of ``train_series``."""
    q = _series(query, "query")
    refs = np.ascontiguousarray(train_series, dtype=np.float64)
    if refs.ndim != 2 or refs.shape[0] == 0:
        raise DataError("training set is empty")
    if cfg.squared:
        band = band_radius(q.size, refs.shape[1], cfg.window)
        return kernels.dtw_many(q, refs, band)
    return np.array([dtw_distance(q, r, cfg) for r in refs])


def nn1_classify(query, train, cfg=DtwConfig()):
    """Label of the nearest training series; ties go to the lowest row index."""
    if len(train) == 0:
        raise DataError("training set is empty")
    d = distances_to(query, train.series, cfg)
    return train.labels[int(np.argmin(d))].item()


def baseline_predict(train, test, cfg=DtwConfig(), n_jobs=1):
    if len(train) == 0 or len(test) == 0:
        raise DataError("baseline needs non-empty train and test sets")
    if train.length != test.length:
        raise DimensionError(f"train length {train.length} differs from test length {test.length}")

    def one(q):
        return nn1_classify(q, train, cfg)

    if n_jobs == 1:
        return np.array([one(q) for q in test.series])
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return np.array(list(pool.map(one, test.series)))


def baseline_evaluate(train, test, cfg=DtwConfig(), n_jobs=1):
    """1-NN DTW accuracy on ``test``; the result does not depend on ``n_jobs``."""
    pred = baseline_predict(train, test, cfg, n_jobs)
    return float(np.mean(pred == test.labels))
