"""Compiled vs pure-numpy kernels on random orbit data.

    python3 benchmarks/bench_kernels.py [--N 1000000] [--k 4] [--repeat 5]

Both backends are imported directly, so the comparison does not depend on
which one ``shiftlab`` selected at import.  Results are checked for equality
before timing.
"""

import argparse
import timeit

import numpy as np

from shiftlab._kernels import compiled, pure


def make_inputs(N: int, k: int, seed: int):
    rng = np.random.default_rng(seed)
    M = N + k + 2
    C = np.concatenate([[0.0], np.cumsum(rng.normal(0.0, 0.05, M))])
    Ng = np.concatenate([[0], np.cumsum(rng.random(M) < 0.1)]).astype(np.int64)
    sign = np.where(rng.random(M) < 0.3, 0, np.where(rng.random(M) < 0.5, -1, 1)).astype(np.int8)
    logs = np.where(sign == 0, -np.inf, rng.normal(0.0, 1.0, M))
    centers = rng.normal(0.0, 1.0, k + 1)
    counts = np.cumsum(rng.random(N + 1) < 0.3).astype(np.int64)
    return C, Ng, sign, logs, centers, counts


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=1_000_000)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if compiled is None:
        raise SystemExit("compiled kernels are not built; run: pip install -e . --no-build-isolation")

    C, Ng, sign, logs, centers, counts = make_inputs(args.N, args.k, args.seed)
    N = args.N
    cases = {
        "orbit_visit_mask": lambda mod: mod.orbit_visit_mask(C, Ng, sign, logs, centers, 0.5, N),
        "orbit_deviation": lambda mod: mod.orbit_deviation(C, Ng, sign, logs, centers, N),
        "window_extrema": lambda mod: mod.window_extrema(counts, N // 2, N),
    }
    print(f"N = {N}, k = {args.k}, best of {args.repeat}")
    print(f"{'kernel':<18} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}")
    for name, call in cases.items():
        a, b = call(pure), call(compiled)
        if isinstance(a, tuple):
            assert a == b, name
        else:
            assert np.allclose(a, b, rtol=1e-12, atol=0), name
        t_pure = min(timeit.repeat(lambda: call(pure), number=1, repeat=args.repeat))
        t_comp = min(timeit.repeat(lambda: call(compiled), number=1, repeat=args.repeat))
        print(f"{name:<18} {1e3 * t_pure:>11.2f} {1e3 * t_comp:>12.2f} {t_pure / t_comp:>7.1f}x")


if __name__ == "__main__":
    main()
