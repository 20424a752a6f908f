"""Parameter update rules.

``Adam`` is the optimizer used for training. ``sgd_l2_step`` is a single
plain gradient step with L2 weight decay written in its decay-factor form.
"""

import warnings

import numpy as np

from .errors import DimensionError


class Adam:
    """Adam with bias-corrected moments, keyed by parameter name.

    Gradients passed to :meth:`step` should already contain any penalty
    terms; there is no decoupled weight decay.
    """

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0 or not 0 < beta1 < 1 or not 0 < beta2 < 1 or eps <= 0:
            raise ValueError("invalid Adam hyperparameters")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params, grads):
        """Update ``params`` (a dict of arrays) in place."""
        for k, g in grads.items():
            if params[k].shape != np.shape(g):
                raise DimensionError(f"Adam: gradient for {k!r} has shape {np.shape(g)}, parameter {params[k].shape}")
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            if k not in self.m:
                self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])
            m = self.m[k]
            v = self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            params[k] -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def sgd_l2_step(w, data_grad, lr, alpha2):
    """One gradient step on ``J + alpha2 * w.w / 2``: ``(1 - lr*alpha2) * w - lr * data_grad``."""
    decay = 1.0 - lr * alpha2
    if decay <= 0:
        warnings.warn(f"weight decay factor {decay} is not positive (lr*alpha2 >= 1)", RuntimeWarning, stacklevel=2)
    return decay * np.asarray(w, dtype=np.float64) - lr * np.asarray(data_grad, dtype=np.float64)
