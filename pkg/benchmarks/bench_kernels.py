"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs each kernel on identical inputs under both implementations, checks that
the outputs agree, and prints a timing table.

    python3 benchmarks/bench_kernels.py [--repeats 5] [--users 300 600]
"""

import argparse
import time

import numpy as np

from privacy_profiles import _kernels_py

try:
    from privacy_profiles import _kernels_cy
except ImportError:
    _kernels_cy = None


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench(name, make_args, py_fn, cy_fn, check, repeats):
    args = make_args()
    t_py, out_py = best_of(lambda: py_fn(*args), repeats)
    t_cy, out_cy = best_of(lambda: cy_fn(*args), repeats)
    check(out_py, out_cy)
    speedup = t_py / t_cy if t_cy > 0 else float("inf")
    print(f"{name:<44} {t_py * 1e3:>9.2f} {t_cy * 1e3:>9.2f} {speedup:>8.1f}x")


def close(a, b):
    np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)


def kmedoids_equal(a, b):
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    assert a[2:] == b[2:]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of repeats (default 5)")
    parser.add_argument(
        "--users", type=int, nargs="+", default=[150, 300, 600],
        help="user counts to benchmark (default 150 300 600)",
    )
    parser.add_argument("--width", type=int, default=444, help="question count (default 444)")
    args = parser.parse_args()

    if _kernels_cy is None:
        print("compiled extension is not built; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    print(f"{'kernel':<44} {'python ms':>9} {'cython ms':>9} {'speedup':>9}")
    for n in args.users:
        x = (rng.random((n, args.width)) < 0.6).astype(np.float64)
        x *= np.log(n / np.maximum(x.sum(axis=0), 1))  # tf-idf-shaped weights
        bench(
            f"pairwise_cosine ({n}x{args.width})",
            lambda x=x: (x,),
            _kernels_py.pairwise_cosine,
            _kernels_cy.pairwise_cosine,
            close,
            args.repeats,
        )

    for n in args.users:
        pts = rng.random((n, 3))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        np.fill_diagonal(d, 0.0)
        d = (d + d.T) / 2
        for kappa in (3, 7):
            init = np.sort(rng.choice(n, size=kappa, replace=False)).astype(np.int64)
            bench(
                f"kmedoids_run (n={n}, kappa={kappa})",
                lambda d=d, init=init: (d, init, 100),
                _kernels_py.kmedoids_run,
                _kernels_cy.kmedoids_run,
                kmedoids_equal,
                args.repeats,
            )
        assignment = rng.integers(0, 3, size=n).astype(np.int64)
        bench(
            f"silhouette_samples (n={n}, kappa=3)",
            lambda d=d, a=assignment: (d, a, 3),
            _kernels_py.silhouette_samples,
            _kernels_cy.silhouette_samples,
            close,
            args.repeats,
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
