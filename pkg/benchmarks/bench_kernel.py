"""Compare the compiled and pure-Python Dormand-Prince kernels.

    python benchmarks/bench_kernel.py [--repeat 5] [--tol 1e-10]

Times a long q1+q2 integration and a numeric return-time grid with each kernel,
and checks that both produce the same numbers.
"""

import argparse
import statistics
import time

import numpy as np

from focusfocus.integrate import _backend, active_kernel, numeric_return_times, select_kernel
from focusfocus.invariant import polar_grid
from focusfocus.model import build_model
from focusfocus.series import TruncatedSeries2


def _time(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--horizon", type=float, default=50.0)
    args = p.parse_args(argv)

    model = build_model(TruncatedSeries2.from_dict({(1, 0): 0.3, (0, 1): 0.1, (2, 0): 0.05}), 0.4)
    grid = polar_grid(0.02, 0.2, 4, 16)
    y0 = (0.3, 0.1, 0.2, -0.4)

    def integrate():
        return _backend.kernel.dopri_linear(0.7, 1.3, y0, args.horizon, args.tol, 10_000_000)

    def returns():
        return np.array([[t.t1, t.t2] for t in (numeric_return_times(model, c, tol=args.tol) for c in grid)])

    rows, results = [], {}
    for name in ("compiled", "python"):
        try:
            select_kernel(name)
        except ImportError:
            print(f"{name} kernel unavailable, skipped")
            continue
        t_int, (ts, ys, _, _) = _time(integrate, args.repeat)
        t_ret, rt = _time(returns, args.repeat)
        results[name] = (ys[-1], rt)
        rows.append((name, len(ts) - 1, t_int, t_ret))
    select_kernel("compiled" if "compiled" in results else "python")

    print(f"{'kernel':<10} {'steps':>8} {'integrate [s]':>14} {'return grid [s]':>16}")
    for name, steps, t_int, t_ret in rows:
        print(f"{name:<10} {steps:>8d} {t_int:>14.4f} {t_ret:>16.4f}")
    if len(rows) == 2:
        print(f"speed-up: integrate x{rows[1][2] / rows[0][2]:.1f}, return grid x{rows[1][3] / rows[0][3]:.1f}")
        a, b = results["compiled"][0], results["python"][0]
        d_end = np.max(np.abs(a - b)) / np.max(np.abs(b))
        d_ret = np.max(np.abs(results["compiled"][1] - results["python"][1]))
        print(f"max |compiled - python|: endpoint (relative) {d_end:.2e}, return times {d_ret:.2e}")
    print(f"active kernel: {active_kernel()}")


if __name__ == "__main__":
    main()
