"""Compare the compiled kernels against the numpy fallbacks.

    python3 benchmarks/bench_kernels.py

Needs the extension built in place (python3 setup_ext.py build_ext --inplace);
without it only the fallback column is reported.
"""

import math
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from aperiodic._kernels import compiled_backend, pure_backend

GOLDEN = (math.sqrt(5) - 1) / 2


def timed(fn, *args, repeat=3):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_case(name, args, unwrap=lambda r: r):
    pure_t, pure_r = timed(getattr(pure_backend, name), *args)
    row = [f"{name}{args_repr(args)}".ljust(58), f"{pure_t * 1e3:9.2f}"]
    if compiled_backend is not None:
        fast_t, fast_r = timed(getattr(compiled_backend, name), *args)
        row.append(f"{fast_t * 1e3:9.2f}")
        row.append(f"{pure_t / fast_t:7.1f}x")
        assert unwrap(fast_r) == unwrap(pure_r), f"{name}: backends disagree"
    else:
        row += ["        -", "      -"]
    print("  ".join(row))


def args_repr(args):
    parts = []
    for a in args:
        if isinstance(a, np.ndarray):
            parts.append(f"array{a.shape}")
        else:
            parts.append(repr(a))
    return "(" + ", ".join(parts) + ")"


def main():
    print(f"{'kernel':58s}  {'pure ms':>9s}  {'fast ms':>9s}  {'speedup':>7s}")
    alpha1 = np.array([GOLDEN])
    alpha2 = np.array([GOLDEN, math.sqrt(2) - 1])
    run_case("torus_tail_min", (alpha1, 50_001, 100_000))
    run_case("torus_tail_min", (alpha1, 500_001, 1_000_000))
    run_case("torus_tail_min", (alpha2, 1, 200_000))
    run_case("torus_first_below", (alpha1, 1e-5, 1_000_000))
    rng = np.random.default_rng(0)
    words = rng.integers(1, 3, size=(300_000, 13)).astype(np.int8)
    run_case("word_greedy_net", (words, 6), unwrap=lambda r: r.tolist())
    run_case("word_greedy_net", (words, 13), unwrap=lambda r: r.tolist())
    words3 = rng.integers(1, 4, size=(300_000, 13)).astype(np.int8)
    run_case("word_greedy_net", (words3, 10), unwrap=lambda r: r.tolist())


if __name__ == "__main__":
    main()
