"""Benchmark the similarity kernels: numba JIT vs pure numpy.

Runs the three kernels over bank-shaped workloads (the forgetting scan,
retrieval ranking, and pairwise clustering) in a subprocess per backend so
each process resolves LYFE_KERNELS cleanly, then prints a comparison table.

    python benchmarks/bench_kernels.py [--sizes 100 400 1600] [--dim 256]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, os, sys, time
import numpy as np
from lyfe.embedding import kernels

sizes = json.loads(sys.argv[1])
dim = int(sys.argv[2])
rng = np.random.default_rng(0)
results = {"backend": kernels.BACKEND, "rows": []}

def timeit(fn, *args, repeat=5):
    fn(*args)  # warm (numba compiles here)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best

for n in sizes:
    mat = rng.normal(size=(n, dim))
    v = rng.normal(size=dim)
    row = {
        "n": n,
        "cosine_to_many_us": timeit(kernels.cosine_to_many, mat, v) * 1e6,
        "pairwise_us": timeit(kernels.pairwise_cosine, mat[: min(n, 400)]) * 1e6,
    }
    results["rows"].append(row)
print(json.dumps(results))
"""


def run_backend(backend: str, sizes: list[int], dim: int) -> dict:
    env = dict(os.environ, LYFE_KERNELS=backend)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps(sizes), str(dim)],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 400, 1600])
    parser.add_argument("--dim", type=int, default=256)
    args = parser.parse_args()

    reports = {}
    for backend in ("numpy", "numba"):
        try:
            reports[backend] = run_backend(backend, args.sizes, args.dim)
        except subprocess.CalledProcessError as err:
            print(f"{backend}: failed ({err.stderr.strip().splitlines()[-1]})")
    if "numba" in reports and reports["numba"]["backend"] != "numba":
        print("note: numba not importable; both columns ran the numpy path")

    print(f"\nkernel timings, dim={args.dim} (best of 5, microseconds)")
    print(f"{'n':>6} {'kernel':<18} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for idx, n in enumerate(args.sizes):
        for key, label in (
            ("cosine_to_many_us", "cosine_to_many"),
            ("pairwise_us", "pairwise_cosine"),
        ):
            np_t = reports["numpy"]["rows"][idx][key]
            nb_t = reports.get("numba", reports["numpy"])["rows"][idx][key]
            print(f"{n:>6} {label:<18} {np_t:>10.1f} {nb_t:>10.1f} {np_t / nb_t:>7.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
