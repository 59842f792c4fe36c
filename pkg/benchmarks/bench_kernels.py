"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--cells 40] [--repeat 5]

Kernel timings call both implementations in-process. The grid timing runs a
slice of the weight grid in a subprocess per backend, since the backend is
fixed at import time.
"""

import argparse
import json
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from omdrift import _pykernels

try:
    from omdrift import _kernels
except ImportError:
    _kernels = None

GRID_SNIPPET = """
import json, math, time
from omdrift import BACKEND, BoundaryConditions, build_design, grid_search, initial_estimate, weight_grid, shoot
from omdrift.cli import case_beta
from omdrift.search import Problem
beta, eps = case_beta("I")
t0 = time.perf_counter()
traj = shoot(beta, eps, BoundaryConditions(0.0, math.sqrt(2.0)))
t1 = time.perf_counter()
problem = Problem.from_design(build_design(traj, 0.7, 0))
init = initial_estimate(problem)
grid_search(problem, weight_grid()[::{stride}], init=init)
t2 = time.perf_counter()
print(json.dumps({{"backend": BACKEND, "shoot": t1 - t0, "grid": t2 - t1}}))
"""


def kernel_cases(rng):
    beta = rng.normal(size=10)
    b = rng.normal(size=38)
    free = np.ones(10, dtype=bool)
    return {
        "structure_map": lambda m: m.structure_map(beta, 0.8),
        "el_rhs": lambda m: m.el_rhs(beta, 0.8, 0.3),
        "rk4_path (1000 steps)": lambda m: m.rk4_path(beta * 0.1, 0.8, 0.0, 1.0, 1e-3, 1000),
        "cascade": lambda m: m.cascade(b, free),
    }


def time_call(fn, repeat):
    timer = timeit.Timer(fn)
    n, _ = timer.autorange()
    return min(timer.repeat(repeat, n)) / n


def grid_timing(stride, pure):
    env = dict(os.environ)
    env.pop("OMDRIFT_PURE_PYTHON", None)
    if pure:
        env["OMDRIFT_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", GRID_SNIPPET.format(stride=stride)],
                         capture_output=True, text=True, env=env, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=40, help="approximate number of grid cells to run")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled core not built; only the fallback is available")
    cases = kernel_cases(np.random.default_rng(0))
    print(f"{'kernel':24s} {'python':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, fn in cases.items():
        t_py = time_call(lambda: fn(_pykernels), args.repeat)
        if _kernels is None:
            print(f"{name:24s} {t_py * 1e6:10.2f}us")
            continue
        t_cy = time_call(lambda: fn(_kernels), args.repeat)
        print(f"{name:24s} {t_py * 1e6:10.2f}us {t_cy * 1e6:10.2f}us {t_py / t_cy:7.1f}x")

    stride = max(1, math.ceil(510 / args.cells))
    n_cells = len(range(0, 510, stride))
    print(f"\ncase I, shooting plus {n_cells} grid cells")
    rows = [grid_timing(stride, pure=True)]
    if _kernels is not None:
        rows.append(grid_timing(stride, pure=False))
    for r in rows:
        print(f"  {r['backend']:7s} shoot {r['shoot']:7.3f}s  grid {r['grid']:7.3f}s")
    if len(rows) == 2:
        print(f"  grid speedup {rows[0]['grid'] / rows[1]['grid']:.1f}x")


if __name__ == "__main__":
    main()
