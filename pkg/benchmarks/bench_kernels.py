"""Benchmark the compiled kernels against the numpy reference.

Two levels: microbenchmarks of the three kernels on production-sized
arrays (direct module references, both backends in one process), and an
end-to-end phase Newton solve timed in subprocesses so each run selects
its backend at import like a real session would.

Run:  python3 benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from motorlab import _kernels_py

try:
    from motorlab import _kernels
except ImportError:
    _kernels = None

REPEATS = 7
INNER = 5


def best_time(fn, *args):
    best = np.inf
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        for _ in range(INNER):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / INNER)
    return best


def kernel_inputs(I, M, sigma, seed):
    rng = np.random.default_rng(seed)
    r = np.cumsum(rng.normal(0.0, sigma, (I, M)), axis=1)
    r -= r.min()
    bp = _kernels_py.bernoulli(rng.normal(0.0, 2.0, (I, M - 1)))
    bm = _kernels_py.bernoulli(rng.normal(0.0, 2.0, (I, M - 1)))
    nu = np.abs(rng.normal(1.0, 0.5, (I, I, M)))
    h = 1.0 / (M - 1)
    return r, bp, bm, nu, sigma, h


def micro():
    print("kernel microbenchmarks (best of "
          f"{REPEATS} x {INNER} calls, times in us)")
    header = f"{'case':<34}{'numpy':>10}{'compiled':>10}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    t_arr = np.random.default_rng(0).normal(0.0, 40.0, 200_000)
    cases = [("bernoulli, 200k values", (t_arr,),
              _kernels_py.bernoulli,
              _kernels.bernoulli if _kernels else None)]
    for I, M in [(2, 2049), (3, 1025)]:
        args = kernel_inputs(I, M, 0.005, seed=I * 1000 + M)
        cases.append((f"phase_residual, I={I} M={M}", args,
                      _kernels_py.phase_residual,
                      _kernels.phase_residual if _kernels else None))
        cases.append((f"phase_jacobian, I={I} M={M}", args,
                      _kernels_py.phase_jacobian_bands,
                      _kernels.phase_jacobian_bands if _kernels else None))
    for name, args, py_fn, c_fn in cases:
        t_py = best_time(py_fn, *args) * 1e6
        if c_fn is None:
            print(f"{name:<34}{t_py:>10.1f}{'n/a':>10}{'n/a':>9}")
            continue
        t_c = best_time(c_fn, *args) * 1e6
        print(f"{name:<34}{t_py:>10.1f}{t_c:>10.1f}{t_py / t_c:>8.1f}x")


_SOLVE_SNIPPET = """
import time
import numpy as np
from motorlab import demos, kernels
from motorlab.discretize import Grid
from motorlab.steady_solver import (continuation_sweep, ladder_sigmas,
                                    solve_phase_newton)
cfg = demos.sawtooth_pair()
grid = Grid(2048)
# a cold Newton start this stiff has no basin; production reaches it by
# continuation, so time the warm-started step the way a sweep runs it
warm = continuation_sweep(cfg, grid, ladder_sigmas(0.02)).entries[-1].phase
solve_phase_newton(cfg, grid, 0.01, init=warm)     # warm the caches
best = np.inf
for _ in range(3):
    t0 = time.perf_counter()
    ph = solve_phase_newton(cfg, grid, 0.01, init=warm)
    best = min(best, time.perf_counter() - t0)
print(f"{kernels.backend_name}: {best * 1e3:.1f} ms "
      f"({ph.meta['iterations']} iterations)")
"""


def end_to_end():
    print()
    print("end-to-end phase Newton step (sawtooth demo, sigma 0.02 -> 0.01, "
          "N=2048)")
    for env_extra in ({"MOTORLAB_PURE_PYTHON": "1"}, {}):
        env = dict(os.environ)
        env.pop("MOTORLAB_PURE_PYTHON", None)
        env.update(env_extra)
        out = subprocess.run([sys.executable, "-c", _SOLVE_SNIPPET],
                             capture_output=True, text=True, env=env)
        line = out.stdout.strip() or out.stderr.strip()
        print(f"  {line}")


if __name__ == "__main__":
    if _kernels is None:
        print("compiled backend not built; showing numpy timings only\n")
    micro()
    end_to_end()
