import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from seclab.analysis import (
    GapError,
    bound_f,
    bound_f_k2,
    classical_secretary_probability,
    coefficients,
    enumerate_exact,
    finite_ratio_k2,
    golden_section_max,
    min_gap,
    not_full_probability,
    optimal_alpha,
    optimal_threshold,
    recurrence_residuals,
    selection_count_distribution,
    stochastic_factor,
    virtual_plus_ratio,
)
from seclab.analysis.stochastic import log_stochastic_factor
from seclab.policies import PolicyConfig, PolicyName

VP = PolicyName.VIRTUAL_PLUS


def test_coefficients_k2():
    assert coefficients(2).a == pytest.approx((-3.0, 2.0), rel=1e-14)


def test_coefficients_k3():
    assert coefficients(3).a == pytest.approx((-19 / 8, 15 / 4, -9 / 4), rel=1e-14)


def test_coefficients_reject_k1():
    with pytest.raises(ValueError):
        coefficients(1)


@pytest.mark.parametrize("k", [13, 50, 100, 600, 1000])
def test_recurrence_holds_in_log_space(k):
    assert max(recurrence_residuals(coefficients(k))) < 1e-6


def test_bound_k2_half():
    assert bound_f(2, 0.5) == pytest.approx(0.5 * (1.5 + math.log(0.5)), abs=1e-14)
    assert bound_f(2, 0.5) == pytest.approx(0.40342640, abs=1e-8)


def test_bound_k2_at_table_alpha():
    assert bound_f(2, 0.3824) == pytest.approx(0.4273, abs=1e-4)


@pytest.mark.parametrize("k", range(2, 11))
def test_bound_concave(k):
    xs = [0.01 + 0.98 * i / 999 for i in range(1000)]
    ys = [bound_f(k, x) for x in xs]
    assert max(ys[i - 1] - 2 * ys[i] + ys[i + 1] for i in range(1, 999)) <= 1e-8


@pytest.mark.parametrize("k", [2, 3, 7, 50, 600])
def test_bound_endpoints(k):
    assert abs(bound_f(k, 1 - 1e-9)) < 1e-6
    assert bound_f(k, 1e-9) < 1e-6


def test_bound_domain():
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            bound_f(2, bad)


def test_golden_section_on_parabola():
    x, y = golden_section_max(lambda x: -((x - 0.3) ** 2) + 1, 0.0, 1.0, 1e-10)
    assert x == pytest.approx(0.3, abs=1e-7) and y == pytest.approx(1.0)


@pytest.mark.parametrize(
    "k, alpha, c",
    [(2, 0.3824, 0.4273), (5, 0.3890, 0.4906), (100, 0.3781, 0.5959)],
)
def test_optimal_threshold_examples(k, alpha, c):
    res = optimal_threshold(k)
    assert abs(res.alpha_star - alpha) < 5e-4 and abs(res.c_k - c) < 5e-4


def test_optimal_threshold_idempotent():
    assert optimal_threshold(17) == optimal_threshold(17)
    assert optimal_threshold(3, record=True).evaluations


def test_optimal_alpha_edge_cases():
    assert optimal_alpha(1) == pytest.approx(1 / math.e)
    assert optimal_alpha(5000) == optimal_alpha(1000)


def test_classical_secretary_n3():
    rep = enumerate_exact(VP, 3, 1, PolicyConfig(k=1, t=1))
    assert rep.all_rank_probability[0] == Fraction(1, 2)
    assert classical_secretary_probability(3, 1) == Fraction(1, 2)


@pytest.mark.parametrize("n", range(4, 9))
def test_classical_secretary_two_oracles(n):
    t = math.floor(n / math.e)
    rep = enumerate_exact(VP, n, 1, PolicyConfig(k=1, t=t))
    assert rep.competitive_ratio == classical_secretary_probability(n, t)


@pytest.mark.parametrize("n", [5, 6, 7])
def test_finite_k2_formula_matches_enumeration(n):
    for t in range(2, n - 1):
        oracle = enumerate_exact(VP, n, 2, PolicyConfig(k=2, t=t)).competitive_ratio
        assert finite_ratio_k2(n, t, exact=True) == oracle
        assert virtual_plus_ratio(n, 2, t, exact=True) == oracle
        assert finite_ratio_k2(n, t) == pytest.approx(float(oracle), abs=1e-12)


def test_printed_convention_understates():
    assert finite_ratio_k2(6, 2, "printed", exact=True) < finite_ratio_k2(6, 2, exact=True)
    with pytest.raises(ValueError):
        finite_ratio_k2(6, 2, "other")


@pytest.mark.parametrize("n, k", [(6, 3), (7, 3), (8, 4), (7, 1)])
def test_general_k_ratio_matches_enumeration(n, k):
    for t in range(k, n - k + 1):
        oracle = enumerate_exact(VP, n, k, PolicyConfig(k=k, t=t)).competitive_ratio
        assert virtual_plus_ratio(n, k, t, exact=True) == oracle


def test_finite_ratio_large_n():
    assert finite_ratio_k2(100, 38) >= bound_f_k2(0.38)
    assert abs(finite_ratio_k2(100, 38) - 0.427) < 0.02
    late = finite_ratio_k2(100, 98)
    assert 0 < late < optimal_threshold(2).c_k


def test_not_full_probability_examples():
    assert not_full_probability(6, 2, 3, 2, 1, exact=True) == Fraction(2, 3)
    assert not_full_probability(8, 3, 6, 3, 0, exact=True) == Fraction(3 * 2 * 1, 6 * 5 * 4)


def test_not_full_probability_guard():
    with pytest.raises(ValueError):
        not_full_probability(500, 10, 300, 6, 4)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_not_full_matches_selection_counts(n):
    k = 2
    for t in range(k, n - k + 1):
        cfg = PolicyConfig(k=k, t=t)
        for j in range(t, n):
            law = selection_count_distribution(VP, n, cfg, j)
            for nu in range(k):
                assert not_full_probability(n, t, j, k, nu, exact=True) == law.get(nu, 0)


def test_not_full_sums_to_at_most_one():
    for n in range(5, 12):
        for k in (2, 3):
            for t in range(k, n):
                for j in range(t, n):
                    total = sum(not_full_probability(n, t, j, k, nu, exact=True) for nu in range(k))
                    assert total <= 1


def test_enumeration_bounds_and_ordering():
    rep = enumerate_exact(PolicyName.OPTIMISTIC, 6, 3, PolicyConfig(k=3, t=3))
    assert all(0 <= p <= 1 for p in rep.all_rank_probability)
    assert rep.competitive_ratio <= 1
    vp = enumerate_exact(VP, 6, 2, PolicyConfig(k=2, t=2)).competitive_ratio
    v = enumerate_exact(PolicyName.VIRTUAL, 6, 2, PolicyConfig(k=2, t=2)).competitive_ratio
    assert vp >= v


def test_enumeration_limits():
    with pytest.raises(ValueError):
        enumerate_exact(VP, 9, 2)
    with pytest.raises(ValueError):
        enumerate_exact(PolicyName.NAIVE, 5, 2)


def test_stochastic_factor_ln2():
    assert stochastic_factor(2 * math.log(2), 1.0) == pytest.approx(0.5 ** (4 / 3), abs=1e-14)
    assert stochastic_factor(2 * math.log(2), 1.0) == pytest.approx(0.39685, abs=1e-5)


def test_stochastic_factor_limits():
    assert stochastic_factor(0.5, 1e-6) >= 1 - 1e-9
    assert 0 < stochastic_factor(0.5, 2.0) < 1e-6
    # the factor itself underflows here; its log does not
    assert stochastic_factor(0.5, 1e3) == 0.0
    assert -math.inf < log_stochastic_factor(0.5, 1e3) < -1e6


@given(st.floats(1e-3, 50), st.floats(1e-3, 50), st.floats(0.05, 20))
def test_stochastic_factor_range_and_monotone(d1, d2, sigma):
    f1, f2 = stochastic_factor(d1, sigma), stochastic_factor(d2, sigma)
    assert 0 <= f1 <= 1
    if d1 < d2:
        assert f1 <= f2


def test_stochastic_factor_rejects_zero_gap():
    with pytest.raises(GapError, match="duplicate values"):
        stochastic_factor(0.0, 1.0)
    with pytest.raises(ValueError):
        stochastic_factor(1.0, 0.0)


def test_min_gap():
    assert min_gap(list(range(1, 11))) == 0.5
    assert min_gap([0, 10, 10.5]) == 0.25
    assert min_gap([1.0, 3.0, 1.0]) == 0.0
    with pytest.raises(ValueError):
        min_gap([1.0])
