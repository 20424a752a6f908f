"""Backend selection for the hot loops (convolution and DTW).

The compiled extension is used when it imports; otherwise, or when the
environment variable ``SRDCNN_BACKEND`` is set to ``python``, the numpy
implementations are used. ``BACKEND`` records which one is active.
"""

import os
import warnings

from . import _fallback

python = _fallback

compiled = None
if os.environ.get("SRDCNN_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        if os.environ.get("SRDCNN_BACKEND", "").lower() == "compiled":
            raise
        warnings.warn("srdcnn compiled kernels unavailable; using numpy fallback", stacklevel=2)

_active = compiled if compiled is not None else python
BACKEND = "compiled" if compiled is not None else "python"

conv1d_forward = _active.conv1d_forward
conv1d_backward = _active.conv1d_backward
dtw_distance = _active.dtw_distance
dtw_many = _active.dtw_many
