"""Compare the numba and numpy kernels on inputs of realistic size.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is called once
to trigger compilation, then timed over several repeats; the two paths are
also checked to agree.
"""

import argparse
import time

import numpy as np

from gptlab import _kernels


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def adjacency_case(rng, rays=400, constraints=60, density=0.35):
    inc = rng.random((rays, constraints)) < density
    pos = np.arange(0, rays // 2)
    neg = np.arange(rays // 2, rays)
    return inc, pos, neg, 6


def reveal_case(rng, trials=200_000, n=10):
    cdf = np.array([0.5, 1.0])
    accept = np.array([1.0, 1.0])
    return cdf, accept, rng.random((trials, n)), rng.random((trials, n))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
        return

    cases = [
        ("adjacent_pairs", adjacency_case(rng), _kernels._adjacent_pairs_jit,
         _kernels.adjacent_pairs_numpy),
        ("simulate_reveals", reveal_case(rng), _kernels._simulate_reveals_jit,
         _kernels.simulate_reveals_numpy),
    ]
    print(f"{'kernel':<18}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, case, jit, ref in cases:
        jit(*case)  # compile
        a, b = jit(*case), ref(*case)
        if name == "adjacent_pairs":
            same = {tuple(p) for p in a} == {tuple(p) for p in b}
        else:
            same = np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        if not same:
            raise SystemExit(f"{name}: numba and numpy results differ")
        tj = best_of(lambda: jit(*case), args.repeats)
        tn = best_of(lambda: ref(*case), args.repeats)
        print(f"{name:<18}{tj:>12.4f}{tn:>12.4f}{tn / tj:>10.1f}x")


if __name__ == "__main__":
    main()
