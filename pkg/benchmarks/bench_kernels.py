"""Time the compiled and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 20]

Prints one row per kernel and size with the best-of-N wall time of each
backend and the speedup of the compiled one. End-to-end timings of a
theorem sweep and a first-integral build under each backend follow.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from toruswind.kernels import backends


def _cases(rng):
    for n in (1024, 65536, 1 << 20):
        t = np.arange(n) * (2 * np.pi / n)
        P = 2 + np.cos(t) + 0.01 * rng.standard_normal(n)
        Q = np.sin(3 * t)
        h = 2 * np.pi / n
        yield "winding_integral", n, lambda m, P=P, Q=Q, h=h: m.winding_integral(P, Q, h)
        theta = np.arctan2(Q, P)
        yield "unwrap_total", n, lambda m, th=theta: m.unwrap_total(th)
    for rows in (129, 513):
        F = rng.standard_normal((rows, rows))
        M = rng.standard_normal((rows, rows - 1))
        yield "cumulative_simpson", rows * rows, lambda m, F=F, M=M, r=rows: m.cumulative_simpson(F, M, 0.01, r // 3)


END_TO_END = {
    "theorem sweep": "from toruswind.uniformization import theorem_sweep; theorem_sweep()",
    "first integral res 256": (
        "from toruswind.field import Diffeo2;"
        "from toruswind.firstintegral import GradientSpec, Rect, build_first_integral;"
        "build_first_integral(GradientSpec(Diffeo2.from_expr('(exp(x) + 0.3*y, y + 0.3*x)'), 1.0, 2.0), Rect(0, 1, 0, 1), 256)"
    ),
}


def _end_to_end(pure: bool, stmt: str, repeat: int) -> float:
    env = dict(os.environ)
    if pure:
        env["TORUSWIND_PURE"] = "1"
    code = f"import timeit; print(min(timeit.repeat({stmt!r}, number=1, repeat={repeat})))"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)

    found = backends()
    if "cython" not in found:
        print("compiled backend not built; only the numpy kernels are available", file=sys.stderr)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'size':>10}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, size, call in _cases(rng):
        times = {}
        for backend, module in found.items():
            times[backend] = 1e3 * min(timeit.repeat(lambda: call(module), number=1, repeat=args.repeat))
        cy = times.get("cython", float("nan"))
        print(f"{name:<20}{size:>10}{times['python']:>14.3f}{cy:>14.3f}{times['python'] / cy:>10.1f}")

    print()
    print(f"{'end to end':<26}{'python [s]':>12}{'cython [s]':>12}")
    for label, stmt in END_TO_END.items():
        py = _end_to_end(True, stmt, 3)
        cy = _end_to_end(False, stmt, 3) if "cython" in found else float("nan")
        print(f"{label:<26}{py:>12.3f}{cy:>12.3f}")


if __name__ == "__main__":
    main()
