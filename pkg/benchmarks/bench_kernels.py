"""Time the compiled kernels against the NumPy fallback and check they agree.

Usage: python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from synthaudit import kernels


def _cases(scale: float, rng: np.random.Generator):
    nq, nr = int(2000 * scale), int(4000 * scale)
    q = (rng.random((nq, 4)), rng.integers(0, 6, size=(nq, 3)))
    r = (rng.random((nr, 4)), rng.integers(0, 6, size=(nr, 3)))
    n = int(5000 * scale)
    X = np.round(rng.normal(size=(n, 12)), 2)
    y = (X[:, 0] + rng.normal(size=n) > 0).astype(np.int64)
    blob = rng.bytes(int(2_000_000 * scale))
    return {
        f"nearest_l1 ({nq}x{nr}, 4 num + 3 cat)": lambda impl: impl.nearest_l1(q[0], q[1], r[0], r[1]),
        f"best_split ({n}x12)": lambda impl: impl.best_split(X, y, 5),
        f"fnv1a_64 ({len(blob) / 1e6:.1f} MB)": lambda impl: impl.fnv1a_64(blob),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--scale", type=float, default=1.0)
    args = parser.parse_args()

    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled extension not available; only the fallback can be timed")
    cases = _cases(args.scale, np.random.default_rng(0))
    print(f"{'kernel':<42} " + " ".join(f"{name:>10}" for name in impls) + "   speedup  agree")
    for label, fn in cases.items():
        times = {name: min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat)) for name, impl in impls.items()}
        results = [fn(impl) for impl in impls.values()]
        agree = all(np.array_equal(np.asarray(results[0]), np.asarray(r)) for r in results[1:])
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else "       -"
        print(f"{label:<42} " + " ".join(f"{times[n] * 1e3:8.1f}ms" for n in impls) + f"  {speed}  {agree}")


if __name__ == "__main__":
    main()
