"""Compare the compiled core against the numpy fallback.

    python benchmarks/bench_core.py [--repeat 5]

Each kernel is run on identical inputs by both backends; results are checked
for equality before timings are reported.
"""
import argparse
import sys
import timeit

import numpy as np

from manireg import _purecore
from manireg import graph as G

try:
    from manireg import _core
except ImportError:
    _core = None


def cases(rng):
    g16 = G.random_regular_graph(16, 3, rng)
    g20 = G.random_regular_graph(20, 3, rng)
    big = G.random_graph(400, 0.05, rng)
    order = rng.permutation(400)
    X = rng.normal(size=(1500, 3))
    D2 = G.pairwise_sqdist(X)
    return [
        ("cheeger_enumerate n=16", "cheeger_enumerate", (g16.weights,)),
        ("cheeger_enumerate n=20", "cheeger_enumerate", (g20.weights,)),
        ("sweep_scan n=400", "sweep_scan", (big.weights, order)),
        ("knn_select n=1500 k=8", "knn_select", (D2, 8)),
    ]


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled core not built; only the fallback is available", file=sys.stderr)
        return 1
    rng = np.random.default_rng(0)
    print(f"{'case':<26}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for label, fn, inputs in cases(rng):
        py, cy = getattr(_purecore, fn), getattr(_core, fn)
        if not _same(py(*inputs), cy(*inputs)):
            print(f"{label}: backends disagree", file=sys.stderr)
            return 1
        t_py = min(timeit.repeat(lambda: py(*inputs), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: cy(*inputs), number=1, repeat=args.repeat))
        print(f"{label:<26}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
