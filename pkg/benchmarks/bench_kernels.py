"""Compare the compiled and pure-numpy kernel backends.

Usage: ``python3 benchmarks/bench_kernels.py [--n 131072] [--repeat 5] [--json out.json]``.
Reports the best wall time per kernel and backend, the speed-up, and the
largest disagreement between the two backends on identical inputs.
"""
from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from lhvlab import qcore
from lhvlab._kernels import available_backends, load_backend


def inputs(n: int, d: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    lam = qcore.haar_kets(d, n, rng)
    vecs = qcore.haar_kets(d, 2 * d, rng)
    probs = rng.dirichlet(np.ones(2 * d), size=n) * 0.98
    return {
        "abs2_overlaps": (lam, vecs),
        "sample_categorical": (probs, rng.random(n)),
        "argext_onehot": (rng.random((n, d)), False),
        "joint_histogram": (rng.integers(0, 4, size=(n, 4)).astype(np.int64), (4, 4, 4, 4)),
        "simplex_moments": (rng.standard_exponential((n, d)),),
    }


def bench(n: int, d: int, repeat: int, seed: int = 0) -> list[dict]:
    args = inputs(n, d, seed)
    backends = {name: load_backend(name) for name in available_backends()}
    rows = []
    for kernel, a in args.items():
        row = {"kernel": kernel, "n": n, "d": d}
        outs = {}
        for name, mod in backends.items():
            fn = getattr(mod, kernel)
            outs[name] = np.asarray(fn(*a), dtype=float)
            row[f"{name}_ms"] = 1e3 * min(timeit.repeat(lambda: fn(*a), number=1, repeat=repeat))
        if len(outs) == 2:
            row["speedup"] = row["python_ms"] / row["cython_ms"]
            row["max_abs_diff"] = float(np.max(np.abs(outs["cython"] - outs["python"])))
        rows.append(row)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1 << 17)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write the rows to this file")
    args = ap.parse_args()
    rows = bench(args.n, args.d, args.repeat)
    cols = ["kernel"] + [k for k in rows[0] if k.endswith("_ms") or k in ("speedup", "max_abs_diff")]
    print("  ".join(f"{c:>18}" for c in cols))
    for r in rows:
        print("  ".join(f"{r[c]:>18.4g}" if isinstance(r[c], float) else f"{r[c]:>18}" for c in cols))
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
