"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The end-to-end rows run a full default trial under each backend in a fresh
interpreter, since the backend is fixed at import time.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from carxefe import _fallback

try:
    from carxefe import _kernels
except ImportError:
    _kernels = None

MSD_ARGS = (1.0, 1.0, 0.1, 0.1, 1.0, 1.0, 0.1, 0.0, 0.0, 0.0, 0.3, -0.2, 0.01, 120)
GRID = np.linspace(-1.0, 1.0, 999)
EFE_ARGS = (0.2, 0.7, 1.5, 0.3, 0.9, 0.4, 1.0, 1.0, 1e-3)

TRIAL_SNIPPET = (
    "import time; from carxefe.experiment import ExperimentConfig, run_trial; "
    "run_trial(ExperimentConfig(horizon=5)); t = time.perf_counter(); "
    "[run_trial(ExperimentConfig(seed=s)) for s in range({n})]; "
    "print((time.perf_counter() - t) / {n})"
)


def best_of(fn, number, repeat):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def kernel_rows(repeat):
    backends = [("python", _fallback)] + ([("cython", _kernels)] if _kernels else [])
    rows = []
    for label, mod in backends:
        out = np.empty_like(GRID)
        rows.append(("msd_advance x120", label, best_of(lambda: mod.msd_advance(*MSD_ARGS), 200, repeat)))
        rows.append(("efe_grid n=999", label, best_of(lambda: mod.efe_grid(GRID, out, *EFE_ARGS), 200, repeat)))
    return rows


def trial_rows(n_trials):
    rows = []
    for label, env in [("python", {"CARXEFE_PURE_PYTHON": "1"}), ("cython", {"CARXEFE_PURE_PYTHON": "0"})]:
        if label == "cython" and _kernels is None:
            continue
        res = subprocess.run(
            [sys.executable, "-c", TRIAL_SNIPPET.format(n=n_trials)],
            env={**os.environ, **env}, capture_output=True, text=True, check=True,
        )
        rows.append(("trial horizon=100", label, float(res.stdout)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--trials", type=int, default=10)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; timing the fallback only")
    rows = kernel_rows(args.repeat) + trial_rows(args.trials)
    base = {name: t for name, label, t in rows if label == "python"}
    print(f"{'case':<20}{'backend':<9}{'time':>12}{'speedup':>10}")
    for name, label, t in rows:
        print(f"{name:<20}{label:<9}{t * 1e6:>10.1f}us{base[name] / t:>9.1f}x")


if __name__ == "__main__":
    main()
