"""Asymptotic and finite-n competitive-ratio formulas for Virtual+.

The asymptotic lower bound for budget ``k`` and sampling fraction ``alpha`` is

    f(alpha) = alpha**k * sum_{m<k} a_m * ln(alpha)**m - alpha * a_0
    a_m      = (k**k / (k-1)**(k-m) - k**m) * (-1)**(m+1) / m!

``k**k`` overflows a double near k = 143, so everything here runs in log space.
With ``u = -ln(alpha)`` and ``E(x) = sum_{m<k} x**m / m!`` the bound rewrites to

    f(alpha) = alpha**k * (E(k u) - (k/(k-1))**k * E((k-1) u)) - alpha * a_0

whose terms are all positive and at most O(1), so a compensated sum is enough.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Union

__all__ = [
    "CoefficientSet",
    "BoundResult",
    "coefficients",
    "recurrence_residuals",
    "bound_f",
    "bound_f_k2",
    "golden_section_max",
    "optimal_threshold",
    "optimal_alpha",
    "finite_ratio_k2",
    "not_full_probability",
    "virtual_plus_ratio",
]

Number = Union[float, Fraction]

ALPHA_EPS = 1e-9
ALPHA_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class CoefficientSet:
    """``a_0..a_{k-1}`` held as ``(sign, log|a_m|)`` pairs."""

    k: int
    signs: tuple[int, ...]
    log_abs: tuple[float, ...]

    @property
    def a(self) -> tuple[float, ...]:
        """Plain floats; entries overflow to +-inf for very large k."""
        out = []
        for s, la in zip(self.signs, self.log_abs):
            try:
                out.append(s * math.exp(la))
            except OverflowError:
                out.append(s * math.inf)
        return tuple(out)

    def scaled(self, log_scale: float, lo: int = 0, hi: Optional[int] = None) -> tuple[float, ...]:
        """``a_m * exp(-log_scale)`` for ``lo <= m < hi``; finite when ``log_scale``
        is near the largest ``log|a_m|`` in that window."""
        window = zip(self.signs[lo:hi], self.log_abs[lo:hi])
        return tuple(s * math.exp(la - log_scale) for s, la in window)


def coefficients(k: int) -> CoefficientSet:
    if not isinstance(k, int) or k < 2:
        raise ValueError(f"coefficients need an integer k >= 2, got {k!r}")
    lk, lk1 = math.log(k), math.log(k - 1)
    signs, logs = [], []
    for m in range(k):
        big = k * lk - (k - m) * lk1  # log(k^k / (k-1)^(k-m))
        small = m * lk  # log(k^m); always below big since (k/(k-1))^(k-m) > 1
        logs.append(big + math.log(-math.expm1(small - big)) - math.lgamma(m + 1))
        signs.append(1 if m % 2 else -1)
    return CoefficientSet(k, tuple(signs), tuple(logs))


def recurrence_residuals(cs: CoefficientSet) -> list[float]:
    """Relative residuals of the identities that make ``f''`` collapse to one term.

    ``k(k-1) a_m + (2k-1)(m+1) a_{m+1} + (m+1)(m+2) a_{m+2}`` for ``m <= k-3``, then
    ``k(k-1) a_{k-2} + (2k-1)(k-1) a_{k-1}``. Each is divided by its largest term.
    """
    k = cs.k
    out = []
    for m in range(k - 2):
        scale = max(cs.log_abs[m : m + 3])
        a0, a1, a2 = cs.scaled(scale, m, m + 3)
        terms = [k * (k - 1) * a0, (2 * k - 1) * (m + 1) * a1, (m + 1) * (m + 2) * a2]
        out.append(abs(math.fsum(terms)) / max(abs(x) for x in terms))
    scale = max(cs.log_abs[k - 2 :])
    a0, a1 = cs.scaled(scale, k - 2)
    terms = [k * (k - 1) * a0, (2 * k - 1) * (k - 1) * a1]
    out.append(abs(math.fsum(terms)) / max(abs(x) for x in terms))
    return out


def bound_f(k: int, alpha: float) -> float:
    """Asymptotic Virtual+ competitive-ratio bound at sampling fraction ``alpha``."""
    if k < 2:
        raise ValueError("bound_f needs k >= 2")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    la = math.log(alpha)
    u = -la
    log_c = k * (math.log(k) - math.log(k - 1))  # log (k/(k-1))^k
    lku = math.log(k * u)
    lk1u = math.log((k - 1) * u)
    terms = [alpha * math.exp(log_c), -alpha]
    for m in range(k):
        lg = math.lgamma(m + 1)
        terms.append(math.exp(k * la + m * lku - lg))
        terms.append(-math.exp(log_c + k * la + m * lk1u - lg))
    return math.fsum(terms)


def bound_f_k2(alpha: float) -> float:
    """Closed form of the bound for k = 2."""
    return alpha * (3.0 * (1.0 - alpha) + 2.0 * alpha * math.log(alpha))


def golden_section_max(
    fn: Callable[[float], float], lo: float, hi: float, tol: float
) -> tuple[float, float]:
    """Maximiser of a unimodal ``fn`` on ``[lo, hi]`` to bracket width ``tol``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


@dataclass(frozen=True)
class BoundResult:
    k: int
    alpha_star: float
    c_k: float
    evaluations: Optional[tuple[tuple[float, float], ...]] = None


def optimal_threshold(k: int, record: bool = False) -> BoundResult:
    """``(alpha_k, C_k)``: the maximiser of the (concave) bound and its value."""
    if not isinstance(k, int) or not 2 <= k <= 1000:
        raise ValueError(f"optimal_threshold needs 2 <= k <= 1000, got {k!r}")
    evals: list[tuple[float, float]] = []

    def fn(x: float) -> float:
        y = bound_f(k, x)
        if record:
            evals.append((x, y))
        return y

    alpha, value = golden_section_max(fn, ALPHA_EPS, 1.0 - ALPHA_EPS, ALPHA_TOL)
    return BoundResult(k, alpha, value, tuple(evals) if record else None)


@lru_cache(maxsize=None)
def optimal_alpha(k: int) -> float:
    """Sampling fraction Virtual+ uses by default; ``1/e`` for the classical k = 1."""
    if k == 1:
        return 1.0 / math.e
    if k > 1000:
        # the optimum has flattened out well before this; reuse the k = 1000 value
        k = 1000
    return optimal_threshold(k).alpha_star


def _falling_ratio(t: int, j: int, k: int, exact: bool) -> Number:
    """``t(t-1)...(t-k+1) / (j(j-1)...(j-k+1))``."""
    if exact:
        r = Fraction(1)
        for i in range(k):
            r *= Fraction(t - i, j - i)
        return r
    return math.prod((t - i) / (j - i) for i in range(k))


def finite_ratio_k2(n: int, t: int, convention: str = "reconciled", exact: bool = False) -> Number:
    """Exact finite-n competitive ratio of Virtual+ for k = 2.

    ``(t(t-1)/n) * sum_{j=t}^{n-1} (1 + 2 * sum_{p=t+1}^{j} w(p)) / (j(j-1))``

    ``convention="reconciled"`` uses ``w(p) = 1/(p-2)``, which agrees with
    exhaustive enumeration. ``"printed"`` uses ``w(p) = 1/(p-1)`` as the formula
    is usually quoted; it understates the ratio and is kept for comparison only.
    """
    if not 2 <= t <= n - 2:
        raise ValueError(f"need 2 <= t <= n-2, got n={n}, t={t}")
    if convention == "reconciled":
        shift = 2
    elif convention == "printed":
        shift = 1
    else:
        raise ValueError(f"unknown convention {convention!r}")

    one = Fraction(1) if exact else 1.0
    inner = 0 * one
    outer = []
    for j in range(t, n):
        if j > t:
            inner += one / (j - shift)
        outer.append((1 + 2 * inner) / (j * (j - 1)))
    total = sum(outer, 0 * one) if exact else math.fsum(outer)
    return Fraction(t * (t - 1), n) * total if exact else t * (t - 1) / n * total


def not_full_probability(
    n: int, t: int, j: int, k: int, nu: int, exact: bool = False
) -> Number:
    """Probability that Virtual+ holds exactly ``nu`` selections after step ``j``.

    Direct nested sum over the selection times ``t < p_1 < ... < p_nu <= j``::

        falling(t, k) / falling(j, k) * sum prod_i k / (p_i - k)

    Cost grows like ``j**nu``; use :func:`virtual_plus_ratio` for big instances.
    """
    if not (k <= t <= j <= n - 1):
        raise ValueError(f"need k <= t <= j <= n-1, got n={n}, t={t}, j={j}, k={k}")
    if not 0 <= nu <= k - 1:
        raise ValueError(f"need 0 <= nu <= k-1, got nu={nu}")
    if nu > 3 and j > 200:
        raise ValueError("instance too large for direct nested summation")
    prefix = _falling_ratio(t, j, k, exact)
    if exact:
        total = Fraction(0)
        for ps in itertools.combinations(range(t + 1, j + 1), nu):
            term = Fraction(k**nu)
            for p in ps:
                term /= p - k
            total += term
        return prefix * total
    terms = [k**nu / math.prod(p - k for p in ps) for ps in itertools.combinations(range(t + 1, j + 1), nu)]
    return prefix * math.fsum(terms)


def virtual_plus_ratio(n: int, k: int, t: int, exact: bool = False) -> Number:
    """Exact finite-n competitive ratio of Virtual+ for any ``k``.

    Same decomposition as :func:`not_full_probability`, summed over ``nu < k`` and
    averaged over the arrival slot ``j + 1`` of a top-k item. The inner sums over
    ordered selection times are elementary symmetric polynomials of
    ``k / (p - k)``, updated incrementally in ``j``, so the cost is O(n k).
    """
    if not (k <= t <= n - 1):
        raise ValueError(f"need k <= t <= n-1, got n={n}, k={k}, t={t}")
    one = Fraction(1) if exact else 1.0
    esym = [one] + [0 * one] * (k - 1)  # e_0..e_{k-1} over processed p
    acc = []
    for j in range(t, n):
        if j > t:
            x = one * k / (j - k)
            for nu in range(k - 1, 0, -1):
                esym[nu] += x * esym[nu - 1]
        s = sum(esym, 0 * one) if exact else math.fsum(esym)
        acc.append(_falling_ratio(t, j, k, exact) * s)
    total = sum(acc, 0 * one) if exact else math.fsum(acc)
    return total / n
