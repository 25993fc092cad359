"""Print the optimal sampling fraction alpha_k and bound C_k for a list of budgets.

    python3 scripts/ck_table.py [K ...]
"""

from __future__ import annotations

import sys
import time

from seclab.analysis import optimal_threshold

DEFAULT_KS = (2, 3, 4, 5, 100, 200, 300, 400, 500, 600)


def main(argv: list[str]) -> None:
    ks = [int(a) for a in argv] or list(DEFAULT_KS)
    start = time.perf_counter()
    print(f"{'k':>5}  {'alpha_k':>8}  {'C_k':>8}")
    for k in ks:
        res = optimal_threshold(k)
        print(f"{k:>5}  {res.alpha_star:8.5f}  {res.c_k:8.5f}")
    print(f"({time.perf_counter() - start:.2f}s)")


if __name__ == "__main__":
    main(sys.argv[1:])
