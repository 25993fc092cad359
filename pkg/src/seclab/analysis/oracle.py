"""Exhaustive permutation enumeration: exact selection probabilities for small n."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..policies import PolicyConfig, PolicyName, run_values

__all__ = [
    "EnumerationReport",
    "MAX_ENUMERATION_N",
    "enumerate_exact",
    "selection_count_distribution",
    "classical_secretary_probability",
]

MAX_ENUMERATION_N = 8


@dataclass(frozen=True)
class EnumerationReport:
    policy: PolicyName
    n: int
    k: int
    t: Optional[int]
    rank_counts: tuple[int, ...]  # rank_counts[a-1]: orderings where the a-th best is selected
    orderings: int  # n!

    @property
    def all_rank_probability(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.orderings) for c in self.rank_counts)

    @property
    def per_rank_probability(self) -> tuple[Fraction, ...]:
        return self.all_rank_probability[: self.k]

    @property
    def competitive_ratio(self) -> Fraction:
        return sum(self.per_rank_probability, Fraction(0)) / self.k

    @property
    def competitive_ratio_float(self) -> float:
        return float(self.competitive_ratio)


def _check(policy: PolicyName, n: int) -> None:
    if n > MAX_ENUMERATION_N:
        raise ValueError(f"enumeration limited to n <= {MAX_ENUMERATION_N} (got n={n})")
    if policy is PolicyName.NAIVE:
        raise ValueError("naive is randomised; it cannot be enumerated exactly")


def enumerate_exact(
    policy: "str | PolicyName", n: int, k: int, config: Optional[PolicyConfig] = None
) -> EnumerationReport:
    """Run ``policy`` on every ordering of the values ``1..n`` and count, per rank,
    how often that item ends up selected."""
    policy = PolicyName.parse(policy)
    _check(policy, n)
    config = (config or PolicyConfig(k=k)).resolve(policy, n)
    if config.k != k:
        raise ValueError("config.k disagrees with k")
    counts = [0] * n
    for perm in itertools.permutations(range(1, n + 1)):
        if policy is PolicyName.OPT:
            chosen = [n - a for a in range(k)]
        else:
            chosen = [perm[i - 1] for i in run_values(policy, perm, config)]
        for value in chosen:
            counts[n - value] += 1
    return EnumerationReport(policy, n, k, config.t, tuple(counts), math.factorial(n))


def selection_count_distribution(
    policy: "str | PolicyName", n: int, config: PolicyConfig, upto: int
) -> dict[int, Fraction]:
    """Exact law of the number of selections made among arrivals ``1..upto``."""
    policy = PolicyName.parse(policy)
    _check(policy, n)
    if policy is PolicyName.OPT:
        raise ValueError("opt is offline")
    config = config.resolve(policy, n)
    hist: Counter[int] = Counter()
    for perm in itertools.permutations(range(1, n + 1)):
        hist[sum(1 for i in run_values(policy, perm, config) if i <= upto)] += 1
    total = math.factorial(n)
    return {c: Fraction(m, total) for c, m in sorted(hist.items())}


def classical_secretary_probability(n: int, t: int) -> Fraction:
    """Chance the classical single-choice rule (skip ``t``, take the first record)
    lands the best item: ``sum_{j=t+1}^{n} t / (j-1) / n``."""
    if not 1 <= t < n:
        raise ValueError(f"need 1 <= t < n, got n={n}, t={t}")
    return sum((Fraction(t, j - 1) for j in range(t + 1, n + 1)), Fraction(0)) / n
