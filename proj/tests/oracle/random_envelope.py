#!/usr/bin/env python3
"""Monte-Carlo envelope of the largest canonical-angle cosine between two
independent Gaussian n x d matrices, computed with numpy's QR/SVD."""

import argparse
import json

import numpy as np


def sigma1(rng, n, d):
    qa, _ = np.linalg.qr(rng.standard_normal((n, d)))
    qb, _ = np.linalg.qr(rng.standard_normal((n, d)))
    return float(np.linalg.svd(qa.T @ qb, compute_uv=False)[0])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--d", type=int, default=64)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20240117)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    s = np.array([sigma1(rng, args.n, args.d) for _ in range(args.trials)])
    doc = {
        "n": args.n,
        "d": args.d,
        "trials": args.trials,
        "seed": args.seed,
        "numpy": np.__version__,
        "min": float(s.min()),
        "max": float(s.max()),
        "mean": float(s.mean()),
        "sd": float(s.std(ddof=1)),
        "q001": float(np.quantile(s, 0.001)),
        "q999": float(np.quantile(s, 0.999)),
    }
    with open(args.out, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
