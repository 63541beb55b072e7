"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--n 2870] [--d 400] [--k-prime 20] [--repeat 3]
"""

import argparse
import time

import numpy as np

from confclust import _pure, fit_pca, gen_vectors, project
from confclust.merge import neighborhood_size
from confclust.synth import VectorModelSpec

try:
    from confclust import _core
except ImportError:
    _core = None


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2870)
    ap.add_argument("--d", type=int, default=400)
    ap.add_argument("--k-prime", type=int, default=20)
    ap.add_argument("--delta", type=float, default=2.5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    base = VectorModelSpec().sizes
    sizes = tuple(max(1, round(s * args.n / sum(base))) for s in base)
    m, _ = gen_vectors(VectorModelSpec(d=args.d, sizes=sizes))
    p = project(fit_pca(m, args.k_prime), m)
    x = np.ascontiguousarray(m.dense().T)
    y = np.ascontiguousarray(p.coords.T)
    n = m.n_points
    depth = neighborhood_size(args.delta, n)

    backends = {"pure": _pure}
    if _core is not None:
        backends["compiled"] = _core
    results = {}
    for name, mod in backends.items():
        t_pairs, scores = best_of(lambda: mod.pair_scores(x, y), args.repeat)
        scores = np.asarray(scores)
        t_rank, ranked = best_of(lambda: mod.rank_neighbors(scores, n, depth), args.repeat)
        results[name] = (t_pairs, t_rank, scores, np.asarray(ranked))

    print(f"n={n} d={args.d} k'={args.k_prime} neighbours={depth} repeat={args.repeat}")
    print(f"{'backend':<10}{'pair_scores s':>16}{'rank_neighbors s':>18}")
    for name, (tp, tr, _, _) in results.items():
        print(f"{name:<10}{tp:>16.3f}{tr:>18.3f}")
    if "compiled" in results:
        pure, comp = results["pure"], results["compiled"]
        print(f"speedup   {pure[0] / comp[0]:>16.1f}x{pure[1] / comp[1]:>17.1f}x")
        same = np.allclose(pure[2], comp[2], rtol=1e-10) and np.array_equal(pure[3], comp[3])
        print(f"outputs agree: {same}")
    else:
        print("compiled extension not built; only the numpy kernels were timed")


if __name__ == "__main__":
    main()
