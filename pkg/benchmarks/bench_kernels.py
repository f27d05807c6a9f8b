"""Compare the compiled and pure-Python trial kernels.

    python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]

Each row times one (experiment, strategy, m) cell on both backends, checks
the selection masks are identical and reports trials per second.
"""

import argparse
import sys
import time

import numpy as np

from sarbandits import kernels
from sarbandits.experiments import builtin
from sarbandits.simulation import gap_e_complexity

CELLS = [
    (3, "sar", 2),
    (3, "gap_e", 2),
    (4, "uniform", 3),
    (4, "sr", 3),
    (4, "sar", 3),
    (4, "gap_e", 3),
    (1, "sar", 5),
]


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--ties", choices=("index", "random"), default="random")
    args = parser.parse_args(argv)

    if "cython" not in kernels.available_backends():
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")
        return 1

    print(f"{'cell':<18} {'n':>6} {'python t/s':>11} {'cython t/s':>11} {'speedup':>8} same")
    mismatches = 0
    for number, strategy, m in CELLS:
        cfg = builtin(number)
        inst, n = cfg.instance(), cfg.resolve_budget()
        h1 = gap_e_complexity(inst, m) if strategy == "gap_e" else 0.0
        timings = {}
        masks = {}
        for name in ("python", "cython"):
            def block(name=name):
                return kernels.run_trials(
                    inst, strategy, m, n, 1, 0, args.trials, c=2.0, h1=h1,
                    random_ties=args.ties == "random", backend_name=name,
                )

            timings[name], masks[name] = best_time(block, args.repeat)
        same = np.array_equal(masks["python"], masks["cython"])
        mismatches += not same
        py, cy = args.trials / timings["python"], args.trials / timings["cython"]
        label = f"{cfg.name}/{strategy}/m={m}"
        print(f"{label:<18} {n:>6} {py:>11.0f} {cy:>11.0f} {cy / py:>7.0f}x {same}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
