"""Compare the compiled and pure-Python kernel backends on representative workloads.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from specdet import _pykernels

try:
    from specdet import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def theta_workload(n_terms: int, n_times: int):
    k = np.arange(1, n_terms + 1, dtype=float)
    re = k * k
    im = np.zeros_like(re)
    w = np.full_like(re, 2.0)
    ts = np.geomspace(1e-4, 1.0, n_times)
    return re, im, w, ts


def geodesic_workload(n_prims: int):
    rng = np.random.default_rng(7)
    lengths = np.sort(rng.uniform(1.0, 6.0, n_prims))
    counts = rng.integers(1, 4, n_prims).astype(float)
    return lengths, counts


def bench(repeat: int) -> list[tuple[str, str, float]]:
    out = []
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    for n_terms, n_times in ((20_000, 32), (200_000, 64)):
        args = theta_workload(n_terms, n_times)
        for name, mod in backends:
            t = min(timeit.repeat(lambda: mod.theta_sum(*args, 1e-15, 1e-300), number=1, repeat=repeat))
            out.append((f"theta_sum n={n_terms} t-points={n_times}", name, t))
    for n_prims in (100, 2000):
        lengths, counts = geodesic_workload(n_prims)
        for name, mod in backends:
            t = min(timeit.repeat(lambda: mod.geodesic_log_sum(lengths, counts, 0.5, 1e-16, 10**7),
                                  number=1, repeat=repeat))
            out.append((f"geodesic_log_sum primitives={n_prims}", name, t))
    return out


def agreement() -> float:
    """Largest relative difference between the backends on the theta workload."""
    if _ckernels is None:
        return math.nan
    args = theta_workload(20_000, 32)
    a, _ = _pykernels.theta_sum(*args, 1e-15, 1e-300)
    b, _ = _ckernels.theta_sum(*args, 1e-15, 1e-300)
    return float(np.max(np.abs(a - b) / np.abs(b)))


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    rows = bench(args.repeat)
    print(f"{'workload':45s} {'backend':8s} {'seconds':>10s} {'speedup':>8s}")
    base = {}
    for work, name, t in rows:
        if name == "python":
            base[work] = t
        speed = base[work] / t if work in base else math.nan
        print(f"{work:45s} {name:8s} {t:10.4f} {speed:8.1f}")
    print(f"max relative backend difference (theta): {agreement():.2e}")


if __name__ == "__main__":
    main()
