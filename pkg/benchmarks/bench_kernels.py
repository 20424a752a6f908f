"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Shapes follow training on ItalyPowerDemand (T=24) and Coffee (T=286)
with the default 32-filter layers, plus a 1-NN DTW query sweep.
"""

import argparse
import timeit

import numpy as np

from srdcnn import _fallback, kernels

CONV_CASES = [
    # (label, B, Cin, Cout, K, T)
    ("first layer, T=24", 7, 1, 32, 32, 24),
    ("inner layer, T=24", 7, 32, 32, 16, 24),
    ("inner layer, T=286", 16, 32, 32, 16, 286),
]
DTW_CASES = [
    # (label, n_refs, T)
    ("67 refs, T=24", 67, 24),
    ("28 refs, T=286", 28, 286),
]


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.compiled is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    impls = {"compiled": kernels.compiled, "python": _fallback}
    rng = np.random.default_rng(0)

    print(f"{'kernel':<12} {'case':<22} {'compiled ms':>12} {'python ms':>10} {'speedup':>8}")
    for label, B, Cin, Cout, K, T in CONV_CASES:
        x = rng.standard_normal((B, Cin, T))
        w = rng.standard_normal((Cout, Cin, K))
        b = rng.standard_normal(Cout)
        g = rng.standard_normal((B, Cout, T))
        for name, call in (("conv fwd", lambda m: m.conv1d_forward(x, w, b)),
                           ("conv bwd", lambda m: m.conv1d_backward(x, w, g))):
            t = {k: best(lambda: call(m), args.repeat) * 1e3 for k, m in impls.items()}
            print(f"{name:<12} {label:<22} {t['compiled']:>12.3f} {t['python']:>10.3f} {t['python'] / t['compiled']:>7.1f}x")
    for label, n, T in DTW_CASES:
        q = rng.standard_normal(T)
        refs = rng.standard_normal((n, T))
        t = {k: best(lambda: m.dtw_many(q, refs, T), args.repeat) * 1e3 for k, m in impls.items()}
        print(f"{'dtw 1-NN':<12} {label:<22} {t['compiled']:>12.3f} {t['python']:>10.3f} {t['python'] / t['compiled']:>7.1f}x")


if __name__ == "__main__":
    main()
