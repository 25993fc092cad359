"""Competitive ratio against budget k on the synthetic stream, one column per policy.

Defaults follow the noisy synthetic benchmark: n=100, sigma^2=10, 10k trials,
k=1..10. Writes a CSV of (policy, k, value ratio, std error, intersection ratio).

    python3 scripts/ratio_sweep.py [--sigma2 10] [--trials 10000] [--jobs 4] [--out ratio_sweep.csv]
"""

from __future__ import annotations

import argparse

from seclab.harness import sweep
from seclab.streamio import csv_text

POLICIES = ("virtual+", "virtual", "optimistic", "naive")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--kmax", type=int, default=10)
    ap.add_argument("--sigma2", type=float, default=10.0)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="ratio_sweep.csv")
    args = ap.parse_args()

    reports = sweep(POLICIES, range(1, args.kmax + 1), args.n, args.sigma2, args.trials, args.seed, jobs=args.jobs)
    rows = [
        {
            "policy": r.policy,
            "k": r.k,
            "t": r.t,
            "value_ratio": r.value_ratio,
            "std_error": r.std_error,
            "intersection_ratio": r.intersection_ratio,
        }
        for r in reports
    ]
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(rows))

    by_k: dict[int, dict[str, float]] = {}
    for r in reports:
        by_k.setdefault(r.k, {})[r.policy] = r.value_ratio
    print("k    " + "  ".join(f"{p:>10}" for p in POLICIES))
    for k, cells in sorted(by_k.items()):
        print(f"{k:<4} " + "  ".join(f"{cells[p]:10.4f}" for p in POLICIES))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
