"""Domain types shared by every other module.

Items are ranked by ``(value, -arrival)``: the higher value wins and, on equal
values, the earlier arrival counts as strictly larger. That gives a strict total
order, so "top-k" and "the k-th best so far" are always well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

__all__ = [
    "StreamItem",
    "Stream",
    "TotalOrderKey",
    "SeededRng",
    "compare",
    "order_key",
    "permute",
    "top_k_arrivals",
]


@dataclass(frozen=True, order=True)
class TotalOrderKey:
    """Sort key ``(value, -arrival)``; compares with plain ``<``/``>``."""

    value: float
    neg_arrival: int = field(repr=False)

    @classmethod
    def of(cls, value: float, arrival: int) -> "TotalOrderKey":
        return cls(float(value), -int(arrival))

    @property
    def arrival(self) -> int:
        return -self.neg_arrival


def order_key(value: float, arrival: int) -> tuple[float, int]:
    """Bare-tuple form of :class:`TotalOrderKey`, used on hot paths."""
    return (value, -arrival)


def compare(a: TotalOrderKey, b: TotalOrderKey) -> int:
    """Three-way comparison: 1 if ``a`` ranks above ``b``, -1 if below, 0 if equal."""
    if a == b:
        return 0
    return 1 if a > b else -1


@dataclass(frozen=True)
class StreamItem:
    id: str
    arrival: int
    observed_value: float
    true_value: Optional[float] = None
    fooled: Optional[bool] = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.observed_value):
            raise ValueError(f"item {self.id!r}: observed_value must be finite")
        if self.arrival < 1:
            raise ValueError(f"item {self.id!r}: arrival must be >= 1")

    @property
    def key(self) -> TotalOrderKey:
        return TotalOrderKey.of(self.observed_value, self.arrival)


@dataclass(frozen=True)
class Stream:
    """An ordered, gap-free sequence of items with arrivals ``1..n``."""

    items: tuple[StreamItem, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValueError("a stream needs at least one item")
        for pos, item in enumerate(self.items, start=1):
            if item.arrival != pos:
                raise ValueError(
                    f"arrival positions must be exactly 1..n; got {item.arrival} at position {pos}"
                )

    @property
    def n(self) -> int:
        return len(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[StreamItem]:
        return iter(self.items)

    def __getitem__(self, arrival: int) -> StreamItem:
        # 1-based, matching arrival positions
        return self.items[arrival - 1]

    @property
    def observed_values(self) -> list[float]:
        return [it.observed_value for it in self.items]

    @property
    def true_values(self) -> list[Optional[float]]:
        return [it.true_value for it in self.items]

    @classmethod
    def from_values(
        cls,
        observed: Sequence[float],
        true: Optional[Sequence[float]] = None,
        fooled: Optional[Sequence[bool]] = None,
        ids: Optional[Sequence[str]] = None,
    ) -> "Stream":
        n = len(observed)
        items = []
        for i in range(n):
            items.append(
                StreamItem(
                    id=ids[i] if ids is not None else str(i + 1),
                    arrival=i + 1,
                    observed_value=float(observed[i]),
                    true_value=None if true is None else float(true[i]),
                    fooled=None if fooled is None else bool(fooled[i]),
                )
            )
        return cls(tuple(items))

    def reordered(self, order: Iterable[int]) -> "Stream":
        """New stream taking ``self.items[order[0]]`` first, etc. (0-based indices)."""
        return Stream(
            tuple(replace(self.items[j], arrival=pos) for pos, j in enumerate(order, start=1))
        )


@dataclass(frozen=True)
class SeededRng:
    """Splittable seeded randomness.

    ``(seed, stream_index)`` maps to an independent numpy ``SeedSequence`` child,
    so trial ``i`` gets the same draws no matter which worker runs it.
    """

    seed: int
    stream_index: int = 0

    def generator(self, *sub: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & (2**64 - 1), spawn_key=(self.stream_index, *sub))
        return np.random.Generator(np.random.PCG64(ss))

    def permutation(self, n: int) -> np.ndarray:
        """Uniform permutation of ``range(n)`` (numpy's Fisher-Yates shuffle)."""
        return self.generator().permutation(n)


def permute(stream: Stream, rng: SeededRng) -> Stream:
    """Uniformly random reordering of ``stream`` with arrivals renumbered ``1..n``."""
    return stream.reordered(rng.permutation(stream.n).tolist())


def top_k_arrivals(values: Sequence[float], k: int) -> list[int]:
    """Arrival positions (1-based) of the ``k`` largest values under the total order."""
    ranked = sorted(range(len(values)), key=lambda i: (values[i], -i), reverse=True)
    return sorted(i + 1 for i in ranked[:k])
