"""Degradation factor for selecting on noisy value estimates."""

from __future__ import annotations

import itertools
import math
from typing import Sequence

__all__ = ["stochastic_factor", "log_stochastic_factor", "min_gap", "GapError"]


class GapError(ValueError):
    """Raised when the value gap is not positive, so the noisy-ranking bound is void."""


def log_stochastic_factor(delta: float, sigma: float) -> float:
    """Natural log of :func:`stochastic_factor`; stays finite when the factor underflows."""
    if not delta > 0:
        raise GapError(f"gap must be positive (got {delta!r}); duplicate values make the bound inapplicable")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    x = delta / (2.0 * sigma * sigma)
    if math.isinf(x):
        return 0.0
    # base 1 - e^-x, exponent 2 e^-x / (1 - e^-2x)
    log_base = math.log(-math.expm1(-x))
    exponent = 2.0 * math.exp(-x) / -math.expm1(-2.0 * x)
    return exponent * log_base


def stochastic_factor(delta: float, sigma: float) -> float:
    """Lower bound on the probability that noisy observations keep the true top-k.

    With ``x = delta / (2 sigma^2)``: ``(1 - e^-x) ** (2 e^-x / (1 - e^-2x))``.
    Lies in (0, 1) and tends to 1 as ``sigma -> 0``.
    """
    return math.exp(log_stochastic_factor(delta, sigma))


def min_gap(values: Sequence[float]) -> float:
    """Half the smallest pairwise distance between ``values``."""
    if len(values) < 2:
        raise ValueError("min_gap needs at least two values")
    ordered = sorted(values)
    return 0.5 * min(b - a for a, b in itertools.pairwise(ordered))
