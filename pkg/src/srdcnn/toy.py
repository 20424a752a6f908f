"""Synthetic two-class data: sine waves versus square waves."""

import numpy as np

from .data import LabeledDataset


def sine_square(n_per_class=20, length=32, seed=0):
    """Unit-amplitude sines (label 0) and squares (label 1) with random phase.

    Each series spans 1 to 3 periods; the classes are separable by shape.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(length) / length
    series, labels = [], []
    for label in (0, 1):
        for _ in range(n_per_class):
            periods = rng.uniform(1.0, 3.0)
            phase = rng.uniform(0.0, 2 * np.pi)
            wave = np.sin(2 * np.pi * periods * t + phase)
            if label == 1:
                wave = np.where(wave >= 0, 1.0, -1.0)
            series.append(wave)
            labels.append(label)
    return LabeledDataset(np.array(series), np.array(labels))
