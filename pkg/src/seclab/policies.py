"""Single-threshold k-secretary selection policies.

Every online policy is a small state machine: feed it items in arrival order and
it answers select/skip immediately. Items at arrivals ``<= t`` are only observed
(sampling phase); the rule kicks in afterwards (selection phase).

``opt`` is the offline baseline and has no step rule; see :func:`run_offline_opt`.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

from .core import SeededRng, Stream, StreamItem

__all__ = [
    "PolicyName",
    "Reason",
    "Decision",
    "PolicyConfig",
    "InvalidConfig",
    "StepError",
    "ReferenceList",
    "SelectionTrace",
    "Policy",
    "ONLINE_POLICIES",
    "THRESHOLD_POLICIES",
    "make_policy",
    "run_policy",
    "run_values",
    "run_offline_opt",
    "default_threshold",
    "single_ref_preset",
]


class PolicyName(str, Enum):
    NAIVE = "naive"
    OPT = "opt"
    VIRTUAL = "virtual"
    OPTIMISTIC = "optimistic"
    SINGLE_REF = "single-ref"
    VIRTUAL_PLUS = "virtual+"

    @classmethod
    def parse(cls, name: "str | PolicyName") -> "PolicyName":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = "|".join(p.value for p in cls)
            raise InvalidConfig(f"unknown policy {name!r} (expected {valid})") from None


THRESHOLD_POLICIES = (
    PolicyName.VIRTUAL,
    PolicyName.OPTIMISTIC,
    PolicyName.SINGLE_REF,
    PolicyName.VIRTUAL_PLUS,
)
ONLINE_POLICIES = (PolicyName.NAIVE, *THRESHOLD_POLICIES)


class Reason(str, Enum):
    SAMPLING = "sampling"
    RULE_SELECT = "rule_select"
    RULE_SKIP = "rule_skip"
    BUDGET_FULL = "budget_full"
    FORCED_EXHAUST = "forced_exhaust"
    NAIVE_DRAW = "naive_draw"


@dataclass(frozen=True)
class Decision:
    select: bool
    reason: Reason


_SAMPLING = Decision(False, Reason.SAMPLING)
_SELECT = Decision(True, Reason.RULE_SELECT)
_SKIP = Decision(False, Reason.RULE_SKIP)
_FULL = Decision(False, Reason.BUDGET_FULL)
_FORCED = Decision(True, Reason.FORCED_EXHAUST)
_DRAW = Decision(True, Reason.NAIVE_DRAW)


class InvalidConfig(ValueError):
    pass


class StepError(RuntimeError):
    """Items fed out of order, or past the end of the stream."""


def single_ref_preset(n: int, k: int) -> Optional[tuple[int, int]]:
    """Known ``(t, r)`` settings for Single-Ref, or ``None`` when there is none."""
    if k == 1:
        return math.floor(n / math.e), 1
    if k == 1000:
        # grid-searched setting for large budgets: c = 0.13, r = 40
        return math.floor(0.13 * n), 40
    return None


def _clamp(t: int, n: int, k: int) -> int:
    return max(k, min(int(t), n - k))


def default_threshold(policy: "str | PolicyName", n: int, k: int) -> int:
    """Unclamped default sampling length for a threshold policy."""
    policy = PolicyName.parse(policy)
    if policy in (PolicyName.VIRTUAL, PolicyName.OPTIMISTIC):
        return math.floor(n / math.e)
    if policy is PolicyName.VIRTUAL_PLUS:
        from .analysis.bounds import optimal_alpha

        return round(optimal_alpha(k) * n)
    if policy is PolicyName.SINGLE_REF:
        preset = single_ref_preset(n, k)
        if preset is None:
            raise InvalidConfig(f"single-ref has no default threshold for k={k}; pass t and r")
        return preset[0]
    raise InvalidConfig(f"{policy.value} has no sampling threshold")


@dataclass(frozen=True)
class PolicyConfig:
    """Budget ``k``, threshold ``t``, reference rank ``r`` and the exhaust flag.

    ``t``/``r`` may be left as ``None``; :meth:`resolve` fills in defaults for a
    given policy and stream length and clamps ``t`` into ``[k, n-k]``.
    """

    k: int
    t: Optional[int] = None
    r: Optional[int] = None
    exhaust_budget: bool = False

    def resolve(self, policy: "str | PolicyName", n: int) -> "PolicyConfig":
        policy = PolicyName.parse(policy)
        k = self.k
        if not isinstance(k, int) or k < 1:
            raise InvalidConfig(f"k must be a positive integer, got {k!r}")
        if n < 1:
            raise InvalidConfig(f"stream length must be positive, got {n}")
        if k > n:
            raise InvalidConfig(f"budget k={k} exceeds stream length n={n}")
        if policy is not PolicyName.SINGLE_REF and self.r is not None:
            raise InvalidConfig(f"reference rank r only applies to single-ref, not {policy.value}")
        if policy in (PolicyName.NAIVE, PolicyName.OPT):
            return replace(self, t=None)
        if 2 * k > n:
            raise InvalidConfig(f"threshold policies need n >= 2k (n={n}, k={k})")

        t, r = self.t, self.r
        if policy is PolicyName.SINGLE_REF:
            if r is None:
                preset = single_ref_preset(n, k) if t is None else None
                if preset is None:
                    raise InvalidConfig("single-ref requires a reference rank r")
                t, r = preset
            if not 1 <= r <= k:
                raise InvalidConfig(f"reference rank r={r} outside 1..{k}")
        if t is None:
            t = default_threshold(policy, n, k)
        return replace(self, t=_clamp(t, n, k), r=r)


class ReferenceList:
    """Top-``capacity`` keys seen so far, kept ascending so ``R[k]`` is index 0."""

    __slots__ = ("capacity", "_keys")

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._keys: list[tuple[float, int]] = []

    def __len__(self) -> int:
        return len(self._keys)

    @property
    def full(self) -> bool:
        return len(self._keys) >= self.capacity

    @property
    def last(self) -> Optional[tuple[float, int]]:
        """The weakest retained key (``R[k]`` once full)."""
        return self._keys[0] if self._keys else None

    def offer(self, key: tuple[float, int]) -> bool:
        """Insert ``key`` if it belongs in the top list; return whether it did."""
        keys = self._keys
        if len(keys) < self.capacity:
            bisect.insort(keys, key)
            return True
        if key > keys[0]:
            keys.pop(0)
            bisect.insort(keys, key)
            return True
        return False

    def pop_last(self) -> tuple[float, int]:
        return self._keys.pop(0)

    def descending(self) -> list[tuple[float, int]]:
        return self._keys[::-1]

    def arrivals(self) -> tuple[int, ...]:
        """Arrival positions in ``R[1], R[2], ...`` order."""
        return tuple(-key[1] for key in reversed(self._keys))


@dataclass(frozen=True)
class SelectionTrace:
    policy: PolicyName
    config: PolicyConfig
    selected: tuple[int, ...]
    decisions: Optional[tuple[Decision, ...]] = None
    references: Optional[tuple[tuple[int, ...], ...]] = None

    @property
    def selected_set(self) -> frozenset[int]:
        return frozenset(self.selected)


class Policy:
    """Base state machine. Subclasses implement :meth:`_rule` for arrivals ``> t``."""

    name: PolicyName

    def __init__(self, n: int, config: PolicyConfig, rng: Optional[SeededRng] = None):
        config = config.resolve(self.name, n)
        self.n = n
        self.config = config
        self.k = config.k
        self.t = config.t if config.t is not None else 0
        self.exhaust = config.exhaust_budget
        self.reference = ReferenceList(self.k)
        self.selected: list[int] = []
        self.position = 0

    def step(self, item: StreamItem) -> Decision:
        if item.arrival != self.position + 1:
            raise StepError(f"expected arrival {self.position + 1}, got {item.arrival}")
        return self.feed(item.observed_value)

    def feed(self, value: float) -> Decision:
        """Process the next arrival's value."""
        i = self.position + 1
        if i > self.n:
            raise StepError(f"stream has only {self.n} items")
        self.position = i
        if i <= self.t:
            self.reference.offer((value, -i))
            return _SAMPLING
        decision = self._rule(i, value)
        if not decision.select and self.exhaust:
            remaining = self.k - len(self.selected)
            if 0 < remaining and self.n - i + 1 <= remaining:
                decision = _FORCED
        if decision.select:
            self.selected.append(i)
        return decision

    @property
    def budget_left(self) -> bool:
        return len(self.selected) < self.k

    def _rule(self, i: int, value: float) -> Decision:
        raise NotImplementedError


class VirtualPlus(Policy):
    name = PolicyName.VIRTUAL_PLUS

    def _rule(self, i, value):
        if not self.reference.offer((value, -i)):
            return _SKIP
        # R keeps tracking the top-k after the budget fills; it no longer matters then
        return _SELECT if self.budget_left else _FULL


class Virtual(Policy):
    name = PolicyName.VIRTUAL

    def _rule(self, i, value):
        ref = self.reference
        kth_arrival = -ref.last[1]
        if not ref.offer((value, -i)):
            return _SKIP
        if kth_arrival > self.t:
            # R[k] came from the selection phase: virtual update only
            return _SKIP
        return _SELECT if self.budget_left else _FULL


class Optimistic(Policy):
    name = PolicyName.OPTIMISTIC

    def _rule(self, i, value):
        ref = self.reference
        if not len(ref):
            return _SKIP if self.budget_left else _FULL
        if (value, -i) > ref.last:
            if not self.budget_left:
                return _FULL
            ref.pop_last()
            return _SELECT
        return _SKIP


class SingleRef(Policy):
    name = PolicyName.SINGLE_REF

    def __init__(self, n, config, rng=None):
        super().__init__(n, config, rng)
        self.r = self.config.r
        self._anchor: Optional[tuple[float, int]] = None

    def _rule(self, i, value):
        if self._anchor is None:
            # s_r: r-th best of the sampling phase, frozen from here on
            self._anchor = self.reference.descending()[self.r - 1]
        if (value, -i) > self._anchor:
            return _SELECT if self.budget_left else _FULL
        return _SKIP


class Naive(Policy):
    name = PolicyName.NAIVE

    def __init__(self, n, config, rng=None):
        super().__init__(n, config, rng)
        if rng is None:
            raise InvalidConfig("naive needs a SeededRng")
        # sub-stream 1 keeps these draws independent of the caller's generator()
        draw = rng.generator(1).choice(n, size=self.k, replace=False)
        self.picks = frozenset(int(x) + 1 for x in draw)

    def _rule(self, i, value):
        return _DRAW if i in self.picks else _SKIP


_CLASSES = {cls.name: cls for cls in (VirtualPlus, Virtual, Optimistic, SingleRef, Naive)}


def make_policy(
    name: "str | PolicyName", n: int, config: PolicyConfig, rng: Optional[SeededRng] = None
) -> Policy:
    """Fresh policy state for a stream of length ``n``."""
    name = PolicyName.parse(name)
    if name is PolicyName.OPT:
        raise InvalidConfig("opt is offline; use run_offline_opt")
    return _CLASSES[name](n, config, rng)


def run_values(
    name: "str | PolicyName",
    values: Sequence[float],
    config: PolicyConfig,
    rng: Optional[SeededRng] = None,
) -> list[int]:
    """Selected arrival positions for observed ``values`` given in arrival order."""
    policy = make_policy(name, len(values), config, rng)
    feed = policy.feed
    for v in values:
        feed(v)
    return policy.selected


def run_offline_opt(stream: Stream, k: int) -> SelectionTrace:
    """The ``k`` items with the largest true values (ties: earlier arrival wins)."""
    if any(it.true_value is None for it in stream):
        raise ValueError("offline opt needs a true_value on every item")
    config = PolicyConfig(k=k).resolve(PolicyName.OPT, stream.n)
    ranked = sorted(stream, key=lambda it: (it.true_value, -it.arrival), reverse=True)
    chosen = tuple(sorted(it.arrival for it in ranked[: min(k, stream.n)]))
    return SelectionTrace(PolicyName.OPT, config, chosen)


def run_policy(
    name: "str | PolicyName",
    stream: Stream,
    config: PolicyConfig,
    rng: Optional[SeededRng] = None,
    record: bool = False,
) -> SelectionTrace:
    """Run a policy over a whole stream.

    With ``record=True`` the trace also keeps every decision and the reference
    list (as arrival positions) after each step.
    """
    name = PolicyName.parse(name)
    if name is PolicyName.OPT:
        return run_offline_opt(stream, config.k)
    policy = make_policy(name, stream.n, config, rng)
    decisions, refs = [], []
    for item in stream:
        d = policy.step(item)
        if record:
            decisions.append(d)
            refs.append(policy.reference.arrivals())
    return SelectionTrace(
        name,
        policy.config,
        tuple(policy.selected),
        tuple(decisions) if record else None,
        tuple(refs) if record else None,
    )
