import math

import mpmath
import pytest

from core import finite_tails as ft
from core.errors import DomainError
from core.rate_functions import psi_max, psi_min

TABLE_UPPER = [2.9e-2, 9.5e-3, 2.9e-3, 3.2e-2, 1.1e-2, 4.0e-3]
TABLE_LOWER = [2.8e-18, 9.1e-32, 2.8e-58]


def _instances(rows):
    return [ft.FiniteInstance(*row) for row in rows]


def test_instance_validates_sizes():
    with pytest.raises(DomainError):
        ft.FiniteInstance(200, 100, 2000, 1e-3)
    with pytest.raises(DomainError):
        ft.FiniteInstance(10, 100, 2000, 0.0)
    inst = ft.FiniteInstance(100, 200, 2000, 1e-3)
    assert inst.delta == pytest.approx(0.1)
    assert inst.rho == pytest.approx(0.5)


def test_g_max_matches_high_precision_density_bound():
    mpmath.mp.dps = 40
    m, n, lam = 2, 4, mpmath.mpf(2)
    x = n * lam
    oracle = (
        mpmath.sqrt(2 * mpmath.pi) * x ** mpmath.mpf(-1.5) * (x / 2) ** mpmath.mpf((n + m) / 2)
        * mpmath.exp(-x / 2) / (mpmath.gamma(mpmath.mpf(m) / 2) * mpmath.gamma(mpmath.mpf(n) / 2))
    )
    assert ft.g_max_pdf_bound(2, 4, 2.0) == pytest.approx(float(oracle), rel=1e-12)


def test_g_min_matches_high_precision_density_bound():
    mpmath.mp.dps = 40
    m, n, lam = 2, 4, mpmath.mpf("0.1")
    x = n * lam
    half = mpmath.mpf(1) / 2
    oracle = (
        mpmath.sqrt(mpmath.pi / (2 * x)) * (x / 2) ** ((n - m) * half) * mpmath.exp(-x / 2)
        * mpmath.gamma((n + 1) * half)
        / (mpmath.gamma(m * half) * mpmath.gamma((n - m + 1) * half) * mpmath.gamma((n - m + 2) * half))
    )
    assert ft.g_min_pdf_bound(2, 4, 0.1) == pytest.approx(float(oracle), rel=1e-12)


def test_g_min_needs_m_at_most_n():
    with pytest.raises(DomainError):
        ft.g_min_pdf_bound(5, 4, 0.1)


@pytest.mark.parametrize("m,n", [(2, 4), (5, 10), (30, 40), (60, 50), (200, 400)])
@pytest.mark.parametrize("lam", [0.5, 2.0, 7.5])
def test_g_max_stays_under_binet_envelope(m, n, lam):
    assert ft.log_g_max_pdf_bound(m, n, lam) <= ft.log_g_max_binet_envelope(m, n, lam) + 1e-12


def test_density_bounds_approach_rate_functions():
    n, gamma = 20000, 0.5
    m = int(gamma * n)
    assert ft.log_g_max_pdf_bound(m, n, 3.0) / n == pytest.approx(psi_max(3.0, gamma), abs=2e-3)
    assert ft.log_g_min_pdf_bound(m, n, 0.1) / n == pytest.approx(psi_min(0.1, gamma), abs=2e-3)


def test_covering_failure_bound_is_negligible_at_table_sizes():
    assert 0.0 < ft.covering_failure_bound(100, 2000) < 1e-260
    assert ft.log_covering_failure_bound(400, 8000) < -2000.0


@pytest.mark.parametrize("row,expected", list(zip(ft.REFERENCE_UPPER_ROWS, TABLE_UPPER)))
def test_upper_tail_reproduces_published_table(row, expected):
    bound = ft.tail_prob_upper(ft.FiniteInstance(*row))
    assert expected / 2.0 <= bound.total <= expected * 2.0
    assert bound.psi_derivative < 0.0
    assert bound.total == pytest.approx(bound.eig_term + bound.cover_term, rel=1e-12)


@pytest.mark.parametrize("row,expected", list(zip(ft.REFERENCE_LOWER_ROWS, TABLE_LOWER)))
def test_lower_tail_reproduces_published_table(row, expected):
    bound = ft.tail_prob_lower(ft.FiniteInstance(*row))
    assert abs(bound.log10_total - math.log10(expected)) <= 0.31
    assert bound.psi_derivative < 0.0
    assert bound.log_eig_term > bound.log_cover_term


@pytest.mark.parametrize("rows,solve", [
    (ft.REFERENCE_UPPER_ROWS[:3], ft.tail_prob_upper),
    (ft.REFERENCE_UPPER_ROWS[3:], ft.tail_prob_upper),
    (ft.REFERENCE_LOWER_ROWS, ft.tail_prob_lower),
])
def test_doubling_the_instance_scales_the_prefactor_by_n_to_minus_three_halves(rows, solve):
    bounds = [solve(inst) for inst in _instances(rows)]
    for small, large in zip(bounds, bounds[1:]):
        assert large.gamma_used == pytest.approx(small.gamma_used, rel=1e-9)
        step = large.log_prefactors["linear"] - small.log_prefactors["linear"]
        assert step == pytest.approx(-1.5 * math.log(2.0), abs=1e-6)
        slack = (large.instance.n - small.instance.n) * large.instance.epsilon * large.psi_derivative
        assert large.log_total - small.log_total == pytest.approx(step + slack, abs=1e-3)


def test_grouped_lower_polynomial_swaps_the_lambda_power():
    n, lam, gamma = 200, 1.7e-5, 0.5
    assert ft.log_p_min_grouped(n, lam, gamma) == pytest.approx(ft.log_p_max(n, lam, gamma) + 1.0 + math.log(lam))


def test_lower_tail_needs_a_positive_lambda_min():
    with pytest.raises(DomainError):
        ft.tail_prob_lower(ft.FiniteInstance(99, 100, 10000, 1e-5))


def test_tails_shrink_with_problem_size():
    upper = ft.tail_table(_instances(ft.REFERENCE_UPPER_ROWS[:3]))
    lower = ft.tail_table(_instances(ft.REFERENCE_LOWER_ROWS), side=ft.LOWER)
    for rows in (upper, lower):
        logs = [row["log10_prob"] for row in rows]
        assert logs == sorted(logs, reverse=True)
        assert len(set(logs)) == len(logs)


def test_tails_shrink_with_slack():
    looser = ft.tail_prob_upper(ft.FiniteInstance(100, 200, 2000, 1e-3))
    tighter = ft.tail_prob_upper(ft.FiniteInstance(100, 200, 2000, 1e-2))
    assert tighter.log_total < looser.log_total


def test_vanishing_slack_leaves_the_prefactor():
    bound = ft.tail_prob_upper(ft.FiniteInstance(100, 200, 2000, 1e-14))
    assert bound.log_eig_term == pytest.approx(bound.log_prefactors["linear"], abs=1e-9)


def test_prefactor_forms_are_ordered():
    inst = ft.FiniteInstance(100, 200, 2000, 1e-3)
    upper = ft.tail_prob_upper(inst)
    lower = ft.tail_prob_lower(ft.FiniteInstance(100, 200, 2000, 1e-5))
    assert upper.log_prefactors["linear"] > upper.log_prefactors["proof"]
    assert upper.log_prefactors["statement"] < upper.log_prefactors["proof"]
    assert lower.log_prefactors["statement"] == lower.log_prefactors["proof"]
    proof = ft.tail_prob_upper(inst, prefactor_form="proof")
    assert proof.total < upper.total
    assert proof.prefactor_form == "proof"


def test_unknown_prefactor_form_is_rejected():
    with pytest.raises(DomainError):
        ft.tail_prob_upper(ft.FiniteInstance(100, 200, 2000, 1e-3), prefactor_form="sqrt")


def test_tail_table_rejects_unknown_side():
    with pytest.raises(DomainError):
        ft.tail_table(_instances(ft.REFERENCE_UPPER_ROWS[:1]), side="both")


def test_tail_rows_carry_every_prefactor():
    row = ft.tail_prob_upper(ft.FiniteInstance(100, 200, 2000, 1e-3)).as_row()
    assert row["side"] == ft.UPPER
    for form in ft.PREFACTOR_FORMS:
        assert math.isfinite(row[f"log_prefactor_{form}"])
