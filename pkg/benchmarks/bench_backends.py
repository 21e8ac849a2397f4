"""Compare the numba kernels with the pure-numpy fallback.

Each backend is timed in its own interpreter because the switch is read at
import time.  Prints one CSV row per (backend, kernel).

    python benchmarks/bench_backends.py [--n 200000] [--d 50] [--reps 5]
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import subprocess
import sys

_CHILD = r"""
import json, sys, time
import numpy as np
from subgeo import kernels
from subgeo._accel import BACKEND

n, d, reps = map(int, sys.argv[1:4])
rng = np.random.default_rng(0)
X = rng.normal(size=(n, d))
c = rng.normal(size=d)
C = rng.normal(size=(4, d))
A = rng.normal(size=(16, d))
U = rng.normal(size=(16, d))
U /= np.linalg.norm(U, axis=1, keepdims=True)
S = X[:2000] + 5.0

jobs = {
    "sq_dists": lambda: kernels.sq_dists(X, c),
    "min_sq_dists": lambda: kernels.min_sq_dists(X, C),
    "line_sq_dists": lambda: kernels.line_sq_dists(X, A, U),
    "bc_center": lambda: kernels.bc_center(X[:5000], 2000),
    "meb_fw_away": lambda: kernels.meb_fw_away(X[:20000], 1e-3, 100000),
    "polytope_distance": lambda: kernels.polytope_distance(S, 1e-6, 100000, True, False),
}
out = {}
for name, f in jobs.items():
    f()  # warm-up (compiles under numba)
    best = float("inf")
    for _ in range(reps):
        t = time.perf_counter()
        f()
        best = min(best, time.perf_counter() - t)
    out[name] = best
print(json.dumps({"backend": BACKEND, "times": out}))
"""


def run(backend: str, n: int, d: int, reps: int) -> dict:
    env = dict(os.environ)
    env.pop("SUBGEO_DISABLE_NUMBA", None)
    env["SUBGEO_BACKEND"] = backend
    res = subprocess.run([sys.executable, "-c", _CHILD, str(n), str(d), str(reps)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--reps", type=int, default=5)
    a = ap.parse_args(argv)
    res = {b: run(b, a.n, a.d, a.reps) for b in ("numba", "numpy")}
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["kernel", "numba_s", "numpy_s", "speedup"])
    for k in res["numba"]["times"]:
        tn, tp = res["numba"]["times"][k], res["numpy"]["times"][k]
        w.writerow([k, f"{tn:.6f}", f"{tp:.6f}", f"{tp / tn:.2f}"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
