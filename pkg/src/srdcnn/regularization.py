"""L1, L2 and combined (elastic-net) weight penalties and their gradients.

Penalty values are unscaled for the single-norm helpers; ``elastic_*``
apply the two factors. The L1 subgradient uses ``sign(0) = 0``.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PenaltyConfig:
    alpha1: float = 0.01  # L1 factor
    alpha2: float = 0.02  # L2 factor

    def __post_init__(self):
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ValueError(f"penalty factors must be nonnegative, got {self}")


def l2_penalty(w):
    """Half the squared Euclidean norm, ``w.w / 2``."""
    w = np.ravel(w)
    return float(w @ w) / 2.0


def l1_penalty(w):
    return float(np.abs(np.ravel(w)).sum())


def elastic_penalty(w, cfg):
    return cfg.alpha1 * l1_penalty(w) + cfg.alpha2 * l2_penalty(w)


def elastic_grad(w, cfg):
    w = np.asarray(w, dtype=np.float64)
    return cfg.alpha1 * np.sign(w) + cfg.alpha2 * w
