"""Small array primitives the layers are written against.

Tensors are plain C-contiguous ``float64`` numpy arrays; these helpers add
the shape checks and error messages the rest of the package relies on.
"""

import numpy as np

from .errors import DimensionError


def as_tensor(x):
    """Return ``x`` as a C-contiguous float64 array (no copy if already one)."""
    return np.ascontiguousarray(x, dtype=np.float64)


def matmul(a, b):
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return a @ b


def pad1d(x, left, right):
    """Zero-pad the last (time) axis of ``x`` by ``left``/``right`` samples."""
    if left < 0 or right < 0:
        raise DimensionError(f"pad1d: negative padding ({left}, {right})")
    x = as_tensor(x)
    widths = [(0, 0)] * (x.ndim - 1) + [(left, right)]
    return np.pad(x, widths)


def mean_axis(x, axis):
    x = as_tensor(x)
    if not -x.ndim <= axis < x.ndim:
        raise DimensionError(f"mean_axis: axis {axis} out of range for shape {x.shape}")
    return x.mean(axis=axis)
