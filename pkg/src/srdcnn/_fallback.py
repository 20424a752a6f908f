"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built, or when ``SRDCNN_BACKEND=python``.
"""

import numpy as np


def _windows(x, K):
    # [B, C, T] -> [B, C, K, T] view of the same-padded input
    pl = (K - 1) // 2
    xp = np.pad(x, ((0, 0), (0, 0), (pl, K - 1 - pl)))
    T = x.shape[2]
    return np.lib.stride_tricks.sliding_window_view(xp, T, axis=2)[:, :, :K, :]


def conv1d_forward(x, w, bias):
    B, Cin, T = x.shape
    Cout, _, K = w.shape
    cols = _windows(x, K).reshape(B, Cin * K, T)
    out = np.matmul(w.reshape(Cout, Cin * K), cols)
    out += bias[None, :, None]
    return out


def conv1d_backward(x, w, grad_out):
    B, Cin, T = x.shape
    Cout, _, K = w.shape
    pl = (K - 1) // 2
    cols = _windows(x, K).reshape(B, Cin * K, T)
    gb = grad_out.sum(axis=(0, 2))
    gw = np.tensordot(grad_out, cols, axes=([0, 2], [0, 2])).reshape(Cout, Cin, K)
    gcols = np.matmul(w.reshape(Cout, Cin * K).T, grad_out).reshape(B, Cin, K, T)
    gxp = np.zeros((B, Cin, T + K - 1))
    for k in range(K):
        gxp[:, :, k:k + T] += gcols[:, :, k, :]
    return np.ascontiguousarray(gxp[:, :, pl:pl + T]), gw, gb


def dtw_many(query, refs, band):
    """Banded DTW from ``query`` to every row of ``refs``, vectorised over rows."""
    m = query.shape[0]
    N, n = refs.shape
    cost = (query[None, :, None] - refs[:, None, :]) ** 2
    prev = np.full((N, n + 1), np.inf)
    prev[:, 0] = 0.0
    cur = np.empty_like(prev)
    for i in range(1, m + 1):
        cur.fill(np.inf)
        jlo = max(i - band, 1)
        jhi = min(i + band, n)
        for j in range(jlo, jhi + 1):
            best = np.minimum(np.minimum(prev[:, j - 1], prev[:, j]), cur[:, j - 1])
            cur[:, j] = cost[:, i - 1, j - 1] + best
        prev, cur = cur, prev
    return prev[:, n].copy()


def dtw_distance(a, b, band):
    return float(dtw_many(a, b[None, :], band)[0])
