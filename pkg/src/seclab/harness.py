"""Monte Carlo estimation of competitive ratios and the online attack runner.

Each trial ``i`` draws everything it needs (noise, arrival order, Naive's picks)
from ``SeededRng(seed, i)``, so results do not depend on how trials are split
across worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import SeededRng, Stream, StreamItem, permute
from .policies import (
    InvalidConfig,
    PolicyConfig,
    PolicyName,
    run_offline_opt,
    run_policy,
    run_values,
)

__all__ = [
    "SyntheticSpec",
    "RatioReport",
    "AttackDataError",
    "synth_stream",
    "trial_scores",
    "estimate_ratios",
    "sweep",
    "attack_config",
    "run_attack",
    "attack_over_permutations",
]


@dataclass(frozen=True)
class SyntheticSpec:
    """Item ``i`` (1-based, before shuffling) has true value ``i`` and is observed
    with additive ``Normal(0, sigma2)`` noise."""

    n: int
    sigma2: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class RatioReport:
    policy: str
    n: int
    k: int
    t: Optional[int]
    r: Optional[int]
    trials: int
    value_ratio: Optional[float]
    std_error: Optional[float]
    intersection_ratio: Optional[float]
    intersection_std_error: Optional[float]
    ratio_of_means: Optional[float] = None
    observed_intersection_ratio: Optional[float] = None
    observed_intersection_std_error: Optional[float] = None
    sigma2: Optional[float] = None
    fool_rate: Optional[float] = None
    fool_rate_std: Optional[float] = None
    fool_rate_std_error: Optional[float] = None

    @property
    def knapsack_ratio(self) -> Optional[float]:
        return self.value_ratio


class AttackDataError(ValueError):
    """The stream lacks a field the attack runner needs."""


def synth_stream(spec: SyntheticSpec, rng: Optional[SeededRng] = None) -> Stream:
    if spec.n < 1 or spec.sigma2 < 0:
        raise ValueError("need n >= 1 and sigma2 >= 0")
    gen = (rng or SeededRng(spec.seed)).generator()
    true = np.arange(1, spec.n + 1, dtype=float)
    observed = true + gen.normal(0.0, math.sqrt(spec.sigma2), spec.n) if spec.sigma2 > 0 else true
    return Stream.from_values(observed.tolist(), true.tolist())


def _mean_se(xs: Sequence[float]) -> tuple[float, float]:
    m = len(xs)
    mean = math.fsum(xs) / m
    if m < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in xs) / (m - 1)
    return mean, math.sqrt(var / m)


def trial_scores(
    policy: PolicyName,
    n: int,
    k: int,
    sigma2: float,
    config: PolicyConfig,
    seed: int,
    trials: Iterable[int],
) -> list[tuple[float, float, float]]:
    """``(value_ratio, intersection_ratio, observed_intersection_ratio)`` per trial.

    The first two score against the offline optimum on true values; the last
    scores against the top-k by observed value. ``config`` must already be
    resolved for ``(policy, n)``.
    """
    sd = math.sqrt(sigma2)
    true = np.arange(1, n + 1, dtype=float)
    best = (2 * n - k + 1) * k / 2  # sum of n-k+1..n
    cut = n - k  # true values above this form the offline optimum
    out = []
    for i in trials:
        rng = SeededRng(seed, i)
        gen = rng.generator()
        observed = true + gen.normal(0.0, sd, n) if sd > 0 else true
        order = gen.permutation(n)
        if policy is PolicyName.OPT:
            out.append((1.0, 1.0, math.nan))
            continue
        seen = observed[order].tolist()
        picked = run_values(policy, seen, config, rng)
        truths = [int(order[a - 1]) + 1 for a in picked]
        # observed top-k under the (value, -arrival) order
        top_seen = set(sorted(range(n), key=lambda j: (seen[j], -j))[n - k :])
        out.append(
            (
                sum(truths) / best,
                sum(1 for v in truths if v > cut) / k,
                sum(1 for a in picked if a - 1 in top_seen) / k,
            )
        )
    return out


def _chunks(m: int, parts: int) -> list[range]:
    size = -(-m // parts)
    return [range(s, min(s + size, m)) for s in range(0, m, size)]


def estimate_ratios(
    policy: "str | PolicyName",
    n: int,
    k: int,
    sigma2: float = 0.0,
    trials: int = 10_000,
    seed: int = 0,
    t: Optional[int] = None,
    r: Optional[int] = None,
    exhaust: bool = False,
    jobs: int = 1,
) -> RatioReport:
    """Average value and intersection ratios against the offline optimum on true values."""
    policy = PolicyName.parse(policy)
    if trials < 1:
        raise InvalidConfig("trials must be >= 1")
    if sigma2 < 0:
        raise InvalidConfig("sigma2 must be >= 0")
    config = PolicyConfig(k=k, t=t, r=r, exhaust_budget=exhaust).resolve(policy, n)

    if jobs > 1 and trials > 1:
        parts = _chunks(trials, jobs)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(trial_scores, policy, n, k, sigma2, config, seed, part) for part in parts
            ]
            scores = [s for f in futures for s in f.result()]
    else:
        scores = trial_scores(policy, n, k, sigma2, config, seed, range(trials))

    values = [s[0] for s in scores]
    hits = [s[1] for s in scores]
    v_mean, v_se = _mean_se(values)
    h_mean, h_se = _mean_se(hits)
    o_mean, o_se = _mean_se([s[2] for s in scores])
    return RatioReport(
        policy=policy.value,
        n=n,
        k=k,
        t=config.t,
        r=config.r,
        trials=trials,
        value_ratio=v_mean,
        std_error=v_se,
        intersection_ratio=h_mean,
        intersection_std_error=h_se,
        # every trial shares the same optimum, so ratio-of-means equals mean-of-ratios here
        ratio_of_means=math.fsum(values) / trials,
        observed_intersection_ratio=o_mean,
        observed_intersection_std_error=o_se,
        sigma2=sigma2,
    )


def sweep(
    policies: Sequence["str | PolicyName"],
    ks: Sequence[int],
    n: int,
    sigma2: float = 0.0,
    trials: int = 10_000,
    seed: int = 0,
    t: Optional[int] = None,
    r: Optional[int] = None,
    exhaust: bool = False,
    jobs: int = 1,
) -> list[RatioReport]:
    """One report per ``(policy, k)``, policy-major. Every cell reuses the same
    per-trial streams (same seed), which keeps policy comparisons paired.
    ``r`` is passed to single-ref only."""
    names = [PolicyName.parse(p) for p in policies]
    return [
        estimate_ratios(p, n, k, sigma2, trials, seed, t, r if p is PolicyName.SINGLE_REF else None, exhaust, jobs)
        for p in names
        for k in ks
    ]


def attack_config(k: int, t: Optional[int] = None, r: Optional[int] = None, exhaust: bool = True) -> PolicyConfig:
    """Config for attack runs; the budget is spent in full unless told otherwise."""
    return PolicyConfig(k=k, t=t, r=r, exhaust_budget=exhaust)


def run_attack(
    stream: Stream,
    policy: "str | PolicyName",
    config: PolicyConfig,
    rng: Optional[SeededRng] = None,
) -> RatioReport:
    """Select on surrogate losses and score the submitted attacks.

    The fool rate always divides by ``k``, even when fewer items were selected.
    Value and intersection ratios need target losses on every item and are
    ``None`` otherwise.
    """
    policy = PolicyName.parse(policy)
    missing = [it.id for it in stream if it.fooled is None]
    if missing:
        raise AttackDataError(f"{len(missing)} record(s) lack a 'fooled' flag, e.g. {missing[0]!r}")
    has_truth = all(it.true_value is not None for it in stream)
    if policy is PolicyName.OPT and not has_truth:
        raise AttackDataError("opt needs target losses on every record")

    trace = run_policy(policy, stream, config, rng)
    k = config.k
    fool = sum(1 for a in trace.selected if stream[a].fooled) / k

    value_ratio = hit_ratio = None
    resolved = trace.config
    if has_truth:
        best = run_offline_opt(stream, k).selected
        denom = math.fsum(stream[a].true_value for a in best)
        value_ratio = math.fsum(stream[a].true_value for a in trace.selected) / denom if denom > 0 else math.nan
        hit_ratio = len(set(trace.selected) & set(best)) / k
    return RatioReport(
        policy=policy.value,
        n=stream.n,
        k=k,
        t=resolved.t,
        r=resolved.r,
        trials=1,
        value_ratio=value_ratio,
        std_error=None,
        intersection_ratio=hit_ratio,
        intersection_std_error=None,
        fool_rate=fool,
    )


def _mean_or_none(xs: list[Optional[float]]) -> tuple[Optional[float], Optional[float]]:
    if any(x is None for x in xs):
        return None, None
    return _mean_se(xs)  # type: ignore[arg-type]


def attack_over_permutations(
    stream: Stream,
    policy: "str | PolicyName",
    config: PolicyConfig,
    seed: int = 0,
    permutations: int = 100,
) -> tuple[RatioReport, list[RatioReport]]:
    """Repeat :func:`run_attack` over seeded shuffles of ``stream``.

    Returns the aggregate report (mean fool rate, its spread and standard error)
    and the per-permutation reports.
    """
    if permutations < 1:
        raise InvalidConfig("permutations must be >= 1")
    runs = []
    for i in range(permutations):
        rng = SeededRng(seed, i)
        runs.append(run_attack(permute(stream, rng), policy, config, rng))
    fools = [rep.fool_rate for rep in runs]
    f_mean, f_se = _mean_se(fools)
    f_std = f_se * math.sqrt(permutations)
    v_mean, v_se = _mean_or_none([rep.value_ratio for rep in runs])
    h_mean, h_se = _mean_or_none([rep.intersection_ratio for rep in runs])
    first = runs[0]
    summary = RatioReport(
        policy=first.policy,
        n=first.n,
        k=first.k,
        t=first.t,
        r=first.r,
        trials=permutations,
        value_ratio=v_mean,
        std_error=v_se,
        intersection_ratio=h_mean,
        intersection_std_error=h_se,
        ratio_of_means=None,
        fool_rate=f_mean,
        fool_rate_std=f_std,
        fool_rate_std_error=f_se,
    )
    return summary, runs
