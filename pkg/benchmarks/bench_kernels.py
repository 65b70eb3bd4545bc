"""Timing comparison of the compiled kernels against the NumPy fallback.

Run from the repository root after an editable install:

    python3 benchmarks/bench_kernels.py [--repeats N]

Both backends are imported directly, so the comparison does not depend on
which one the package selected at import time.
"""

import argparse
from time import perf_counter

import numpy as np

from beamqubit._kernels import pure

try:
    from beamqubit._kernels import _fast
except ImportError:
    _fast = None


def median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = perf_counter()
        fn()
        times.append(perf_counter() - t0)
    return float(np.median(times))


def workloads():
    rng = np.random.default_rng(0)
    xs = rng.uniform(1e-3, 40.0, 100_000)
    weights = rng.dirichlet(np.ones(1024))
    phis = rng.uniform(0.0, np.pi, 256)
    big = rng.dirichlet(np.ones(4096))
    m = rng.normal(size=(512, 512)) + 1j * rng.normal(size=(512, 512))
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    return [
        ("k1_array, 1e5 points", lambda impl: impl.k1_array(xs)),
        ("readout_sums, 1024 x 256", lambda impl: impl.readout_sums(weights, phis)),
        ("cosine_filter_diag, 4096", lambda impl: impl.cosine_filter_diag(big, 0.11, 0.5)),
        ("cosine_filter_matrix, 512^2", lambda impl: impl.cosine_filter_matrix(rho, 0.11, 0.5)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7,
                        help="timing repeats per workload (median is reported)")
    args = parser.parse_args()
    if _fast is None:
        print("compiled extension not built; nothing to compare")
        return
    print(f"{'workload':<30} {'pure':>10} {'cython':>10} {'speedup':>8}")
    for name, run in workloads():
        t_pure = median_time(lambda: run(pure), args.repeats)
        t_fast = median_time(lambda: run(_fast), args.repeats)
        print(f"{name:<30} {t_pure * 1e3:>8.2f}ms {t_fast * 1e3:>8.2f}ms "
              f"{t_pure / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
