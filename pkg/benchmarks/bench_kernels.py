"""Compare the compiled and pure-Python kernels, alone and inside a full run.

    python3 benchmarks/bench_kernels.py [--repeat N] [--devices N]
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from fogfed import _kernels_py

try:
    from fogfed import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def _inputs(seed=0):
    rng = random.Random(seed)
    n = 12
    sel = (
        [rng.uniform(0.1, 2) for _ in range(n)],
        [rng.uniform(1, 3) for _ in range(n)],
        [rng.uniform(0.9, 1) for _ in range(n)],
        list(range(n)),
        [rng.uniform(0, 1e4) for _ in range(n)],
        2.5, 0.95, True, 0.05,
    )
    probs = [rng.uniform(0.01, 0.05) for _ in range(5)]
    t, arr, svc = 0.0, [], []
    for _ in range(20_000):
        t += rng.expovariate(0.8)
        arr.append(t)
        svc.append(rng.expovariate(1.0))
    return sel, probs, arr, svc


def bench_kernels(repeat):
    sel, probs, arr, svc = _inputs()
    cases = [
        ("select_index", lambda k: k.select_index(*sel), 20_000),
        ("failure_product", lambda k: k.failure_product(probs), 50_000),
        ("harmonic_sum", lambda k: k.harmonic_sum(svc[:5]), 50_000),
        ("fifo_sojourn (20k jobs, 2 servers)", lambda k: k.fifo_sojourn(arr, svc, 2), 5),
    ]
    print(f"{'kernel':38s} {'python us':>11s} {'cython us':>11s} {'speedup':>8s}")
    for name, fn, number in cases:
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=number, repeat=repeat)) / number * 1e6
        if _kernels_cy is None:
            print(f"{name:38s} {py:11.3f} {'n/a':>11s}")
            continue
        cy = min(timeit.repeat(lambda: fn(_kernels_cy), number=number, repeat=repeat)) / number * 1e6
        print(f"{name:38s} {py:11.3f} {cy:11.3f} {py / cy:7.1f}x")


ENGINE = """
import time
from fogfed import bundled_config, run, BACKEND
cfg = bundled_config().with_value("workload", "devices", {devices})
t = time.perf_counter()
s = run(cfg, 1).summary
print(BACKEND, time.perf_counter() - t, s.completed, s.p95_latency_s)
"""


def bench_engine(devices):
    print(f"\nfull reference run, {devices} devices, 500 s simulated")
    rows = []
    for force in ("0", "1"):
        env = dict(os.environ, FOGFED_PURE_PYTHON=force)
        out = subprocess.run([sys.executable, "-c", ENGINE.format(devices=devices)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        rows.append(out)
        print(f"  backend={out[0]:7s} wall={float(out[1]):7.2f} s completed={out[2]} p95={float(out[3]):.6f}")
    if rows[0][2:] == rows[1][2:]:
        print("  both backends produced identical results")
    else:
        print("  WARNING: backends disagree")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--devices", type=int, default=200)
    args = ap.parse_args()
    bench_kernels(args.repeat)
    bench_engine(args.devices)


if __name__ == "__main__":
    main()
