"""Regenerate the bundled 1000-record attack stream fixture.

Target losses are distinct draws from a gamma distribution; surrogate losses
are noisy copies of them, and the chance an attack fools the target grows with
its target loss. Output is deterministic for a given seed.

    python3 scripts/make_fixture.py [--seed 5] [--n 1000] [--out PATH]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from seclab.streamio import StreamRecord, dump_records

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "seclab" / "data" / "fixture_stream.jsonl"


def make_records(n: int, seed: int) -> list[StreamRecord]:
    gen = np.random.default_rng(seed)
    target = np.round(gen.gamma(2.0, 1.0, n), 6)
    while len(np.unique(target)) < n:  # keep target losses distinct
        dup = np.zeros(n, dtype=bool)
        _, first = np.unique(target, return_index=True)
        dup[np.setdiff1d(np.arange(n), first)] = True
        target[dup] = np.round(gen.gamma(2.0, 1.0, dup.sum()), 6)
    surrogate = np.round(np.abs(target + gen.normal(0.0, 0.5, n)), 6)
    p_fool = 1.0 / (1.0 + np.exp(-(target - 3.0) * 0.6))
    fooled = gen.random(n) < p_fool
    return [
        StreamRecord(f"x{i:04d}", float(s), float(t), bool(f))
        for i, (s, t, f) in enumerate(zip(surrogate, target, fooled))
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    records = make_records(args.n, args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        dump_records(records, fh)
    rate = sum(r.fooled for r in records) / len(records)
    print(f"wrote {len(records)} records to {args.out} (fooled fraction {rate:.3f})")


if __name__ == "__main__":
    main()
