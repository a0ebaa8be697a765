"""Compare the compiled and pure-numpy kernel backends on realistic matvecs.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--sizes 12,16,20] [--repeats 7]

The workload is the open-chain Hamiltonian at alpha = 0.3, bx = 0.6 applied
to a random real vector, the exact inner loop of every Lanczos solve.
"""

import argparse
import statistics
import time

import numpy as np

from clusterhull import _kernels_py
from clusterhull.kernels import compile_terms
from clusterhull.models import ModelParams, build_cluster

try:
    from clusterhull import _kernels
except ImportError:
    _kernels = None


def bench_once(backend, table, vec, out):
    out[:] = 0.0
    t0 = time.perf_counter()
    backend.apply_real(table.mx, table.mz, table.real_weights, vec, out)
    return time.perf_counter() - t0


def bench(backend, table, vec, repeats):
    out = np.zeros_like(vec)
    bench_once(backend, table, vec, out)  # warm up caches
    return [bench_once(backend, table, vec, out) for _ in range(repeats)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="12,16,20", help="comma-separated chain lengths")
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    rng = np.random.default_rng(0)
    print(f"{'n':>4} {'terms':>6} {'numpy (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for n in sizes:
        params = ModelParams(n_sites=n, alpha=0.3, bx=0.6)
        table = compile_terms(build_cluster(params).hamiltonian)
        vec = rng.standard_normal(1 << n)
        t_py = statistics.median(bench(_kernels_py, table, vec, args.repeats))
        if _kernels is None:
            print(f"{n:>4} {len(table):>6} {t_py * 1e3:>12.3f} {'absent':>12} {'-':>8}")
            continue
        t_cy = statistics.median(bench(_kernels, table, vec, args.repeats))
        ref = np.zeros_like(vec)
        got = np.zeros_like(vec)
        _kernels_py.apply_real(table.mx, table.mz, table.real_weights, vec, ref)
        _kernels.apply_real(table.mx, table.mz, table.real_weights, vec, got)
        assert np.allclose(ref, got, atol=1e-12), "backends disagree"
        print(
            f"{n:>4} {len(table):>6} {t_py * 1e3:>12.3f} {t_cy * 1e3:>12.3f} "
            f"{t_py / t_cy:>8.2f}"
        )


if __name__ == "__main__":
    main()
