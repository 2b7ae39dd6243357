"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times the integer pool-size scan over a 500-point prevalence grid (the work
behind ``doublepool sweep``) and the retest-counting kernel on a 10 000
patient double-pooling trial.
"""

import argparse
import timeit

import numpy as np

from doublepool import _kernels_py

try:
    from doublepool import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def scan_workload(mod, grid, ks=(1, 2, 3)):
    for p in grid:
        for k in ks:
            mod.scan_min_cost(float(p), k, 2, 10000)


def trial_inputs(n=10_000, k=2, s=23, p=0.01112, seed=0):
    rng = np.random.default_rng(seed)
    infected = (rng.random(n) < p).astype(np.uint8)
    perms = np.stack([rng.permutation(n) for _ in range(k)]).astype(np.int64)
    pool_ok = np.ones((k, -(-n // s)), dtype=np.uint8)
    return infected, perms, pool_ok, s


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"python": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    else:
        print("compiled kernels not built; timing the pure-Python backend only")

    grid = np.geomspace(1e-4, 0.2, 500)
    trial = trial_inputs()
    results = {}
    for name, mod in backends.items():
        scan_t = best_of(lambda: scan_workload(mod, grid), args.repeat, 1)
        trial_t = best_of(lambda: mod.count_retests(*trial), args.repeat, 20)
        results[name] = (scan_t, trial_t)

    print(f"{'backend':<8} {'scan 500p x k=1..3':>20} {'count_retests n=1e4':>22}")
    for name, (scan_t, trial_t) in results.items():
        print(f"{name:<8} {scan_t * 1e3:>17.2f} ms {trial_t * 1e6:>19.1f} us")
    if len(results) == 2:
        (ps, pt), (cs, ct) = results["python"], results["cython"]
        print(f"{'speedup':<8} {ps / cs:>19.1f}x {pt / ct:>21.1f}x")


if __name__ == "__main__":
    main()
