"""Compare the compiled and numpy jet kernels.

Two measurements per backend:

* tape throughput: order-3 jets of an immersion tape at batch sizes
  64 .. 16384 (the inner loop of every curvature evaluation);
* end to end: ``soliton-lab suite`` in a fresh interpreter with the
  backend forced through ``SOLITON_LAB_BACKEND``.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N] [--json]``.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from soliton_lab import backend, catalog


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def tape_rows(repeat, sizes):
    entry = catalog.make_spherical_hypercylinder(3, 5)
    tape = entry.immersion.tape
    rows = []
    for size in sizes:
        pts = entry.sample(size, seed=0)
        ref = None
        for name in backend.available():
            kern = backend.load(name)
            out = tape.evaluate(pts, kern)
            if ref is None:
                ref = out
            else:
                np.testing.assert_allclose(out, ref, rtol=1e-12, atol=1e-12)
            t = best_of(lambda: tape.evaluate(pts, kern), repeat)
            rows.append({"bench": "tape", "backend": name, "points": size,
                         "seconds": t, "us_per_point": 1e6 * t / size})
    return rows


def suite_rows(repeat):
    rows = []
    for name in backend.available():
        env = dict(os.environ, SOLITON_LAB_BACKEND=name)
        cmd = [sys.executable, "-m", "soliton_lab.cli", "suite", "--format", "json",
               "--out", os.devnull]
        t = best_of(lambda: subprocess.run(cmd, env=env, check=True), repeat)
        rows.append({"bench": "suite", "backend": name, "points": 64, "seconds": t,
                     "us_per_point": None})
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 1024, 16384])
    parser.add_argument("--skip-suite", action="store_true")
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)
    if "cython" not in backend.available():
        print("note: compiled kernel not built; timing the numpy kernel only", file=sys.stderr)
    rows = tape_rows(args.repeat, args.sizes)
    if not args.skip_suite:
        rows += suite_rows(max(1, args.repeat // 2))
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    base = {(r["bench"], r["points"]): r["seconds"] for r in rows if r["backend"] == "python"}
    print(f"{'bench':<6} {'backend':<7} {'points':>7} {'seconds':>10} {'us/point':>9} {'speedup':>8}")
    for r in rows:
        per = "" if r["us_per_point"] is None else f"{r['us_per_point']:.2f}"
        speed = base[(r["bench"], r["points"])] / r["seconds"]
        print(f"{r['bench']:<6} {r['backend']:<7} {r['points']:>7} {r['seconds']:>10.4f} "
              f"{per:>9} {speed:>7.1f}x")


if __name__ == "__main__":
    main()
