"""
Finite-(k, n, N) probability bounds on the restricted isometry constants.

Everything is carried in natural-log space and exponentiated once at the
end; probabilities too small for a double keep their log-values.

The default "linear" prefactor takes the covering ratio X to the first
power with the n^{-7/2} polynomial on both sides. On the upper side it
dominates the half-power "proof" form since X > 1. It is the form whose
n^{-3/2} row scaling matches the published finite-size tables: upper rows
to a few percent, lower rows to a few hundredths of a decade.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from scipy.special import gammaln

from core.asymptotic_bounds import optimize_gamma_for_max, optimize_gamma_for_min
from core.errors import DomainError, require
from core.rate_functions import (
    LN_2PI_HALF,
    STIRLING_UPPER,
    ProblemShape,
    dpsi_max_dlambda,
    dpsi_min_dlambda,
)

logger = logging.getLogger(__name__)

PREFACTOR_FORMS = ("linear", "proof", "statement")
UPPER = "upper"
LOWER = "lower"

# (k, n, N, eps) rows of the published finite-size tables
REFERENCE_UPPER_ROWS = (
    (100, 200, 2000, 1e-3),
    (200, 400, 4000, 1e-3),
    (400, 800, 8000, 1e-3),
    (100, 200, 2000, 1e-10),
    (200, 400, 4000, 1e-10),
    (400, 800, 8000, 1e-10),
)
REFERENCE_LOWER_ROWS = (
    (100, 200, 2000, 1e-5),
    (200, 400, 4000, 1e-5),
    (400, 800, 8000, 1e-5),
)

_LN_COVER_CUBE = 3.0 * math.log(STIRLING_UPPER)
_LN_2 = math.log(2.0)


@dataclass(frozen=True)
class FiniteInstance:
    k: int
    n: int
    N: int
    epsilon: float

    def __post_init__(self):
        require(0 < self.k < self.n < self.N, f"need 0 < k < n < N: got k={self.k}, n={self.n}, N={self.N}")
        require(self.epsilon > 0.0, f"epsilon must be positive: got {self.epsilon}")

    @property
    def delta(self):
        return self.n / self.N

    @property
    def rho(self):
        return self.k / self.n

    @property
    def shape(self):
        return ProblemShape(self.delta, self.rho)


@dataclass(frozen=True)
class TailBound:
    """
    Upper bound on P(U > U^BT + eps) or P(L > L^BT + eps).

    total = eig_term + cover_term before clamping to 1. The log_* fields keep
    values that underflow in linear space. psi_derivative is the (negative)
    coefficient of n*eps in the slack exponent.
    """

    instance: FiniteInstance
    side: str
    prefactor_form: str
    total: float
    eig_term: float
    cover_term: float
    log_total: float
    log_eig_term: float
    log_cover_term: float
    lambda_star: float
    gamma_used: float
    psi_derivative: float
    log_prefactors: Dict[str, float] = field(default_factory=dict)

    @property
    def log10_total(self):
        return self.log_total / math.log(10.0)

    def as_row(self):
        row = {
            "k": self.instance.k,
            "n": self.instance.n,
            "N": self.instance.N,
            "eps": self.instance.epsilon,
            "side": self.side,
            "prob": self.total,
            "log10_prob": self.log10_total,
            "eig_term": self.eig_term,
            "cover_term": self.cover_term,
            "lambda_star": self.lambda_star,
            "gamma": self.gamma_used,
            "psi_derivative": self.psi_derivative,
        }
        for form in PREFACTOR_FORMS:
            row[f"log_prefactor_{form}"] = self.log_prefactors.get(form)
        return row


# ---------------------------------------------------------------------------
# Wishart extreme-eigenvalue density bounds
# ---------------------------------------------------------------------------

def log_g_max_pdf_bound(m, n, lam):
    require(m >= 1 and n >= 1, f"m and n must be positive integers: got m={m}, n={n}")
    require(lam > 0.0, f"lambda must be positive: got {lam}")
    x = n * lam
    return float(
        LN_2PI_HALF
        - 1.5 * math.log(x)
        + 0.5 * (n + m) * math.log(0.5 * x)
        - gammaln(0.5 * m)
        - gammaln(0.5 * n)
        - 0.5 * x
    )


def g_max_pdf_bound(m, n, lam):
    """Upper bound on the density of the largest eigenvalue of an m x m Wishart matrix"""
    return math.exp(log_g_max_pdf_bound(m, n, lam))


def log_g_min_pdf_bound(m, n, lam):
    require(1 <= m <= n, f"need 1 <= m <= n for the smallest eigenvalue: got m={m}, n={n}")
    require(lam > 0.0, f"lambda must be positive: got {lam}")
    x = n * lam
    return float(
        0.5 * math.log(math.pi / (2.0 * x))
        + 0.5 * (n - m) * math.log(0.5 * x)
        + gammaln(0.5 * (n + 1))
        - gammaln(0.5 * m)
        - gammaln(0.5 * (n - m + 1))
        - gammaln(0.5 * (n - m + 2))
        - 0.5 * x
    )


def g_min_pdf_bound(m, n, lam):
    """Upper bound on the density of the smallest eigenvalue of an m x m Wishart matrix"""
    return math.exp(log_g_min_pdf_bound(m, n, lam))


def log_g_max_binet_envelope(m, n, lam):
    """
    n psi_max(lam, m/n) plus the polynomial left over after bounding both
    log-gammas of g_max from below; dominates log_g_max_pdf_bound for all m, n.
    """
    gamma = m / n
    psi = 0.5 * ((1.0 + gamma) * math.log(lam) - gamma * math.log(gamma) + 1.0 + gamma - lam)
    return n * psi - LN_2PI_HALF - 1.5 * math.log(lam) - 0.5 * math.log(n) + 0.5 * math.log(gamma) - _LN_2


def log_p_max(n, lam, gamma):
    """ln of (8/pi)^{1/2} gamma^{-1} n^{-7/2} lam^{-3/2}"""
    return 0.5 * math.log(8.0 / math.pi) - math.log(gamma) - 3.5 * math.log(n) - 1.5 * math.log(lam)


def log_p_min(lam):
    """ln of e / (2 pi sqrt(2 lam))"""
    return 1.0 - math.log(2.0 * math.pi) - 0.5 * math.log(2.0 * lam)


def log_p_min_grouped(n, lam, gamma):
    """
    ln of e (8/pi)^{1/2} gamma^{-1} n^{-7/2} lam^{-1/2}: p_max with the
    (n lam)^{-1/2} of g_min in place of the (n lam)^{-3/2} of g_max.
    """
    return 1.0 + 0.5 * math.log(8.0 / math.pi) - math.log(gamma) - 3.5 * math.log(n) - 0.5 * math.log(lam)


# ---------------------------------------------------------------------------
# Tail bounds
# ---------------------------------------------------------------------------

def log_covering_failure_bound(k, N):
    require(0 < k < N, f"need 0 < k < N: got k={k}, N={N}")
    p = k / N
    return math.log(STIRLING_UPPER) - 0.5 * math.log(2.0 * math.pi * k * (1.0 - p)) - N * (1.0 - _LN_2)


def covering_failure_bound(k, N):
    """(5/4)(2 pi k (1 - k/N))^{-1/2} e^{-N(1 - ln 2)}; underflows to 0 for large N"""
    return math.exp(log_covering_failure_bound(k, N))


def _log_group_ratio(inst, gamma):
    delta, rho = inst.delta, inst.rho
    if gamma <= rho:
        raise DomainError(
            f"gamma equals rho={rho} for (k={inst.k}, n={inst.n}, N={inst.N}); the grouped prefactor is undefined"
        )
    return math.log(inst.n * inst.N * (gamma - rho) / (gamma * delta * (1.0 - rho * delta)))


def _log_prefactors(inst, side, lam, gamma):
    log_x = _log_group_ratio(inst, gamma)
    scale = _LN_2 + math.log(lam) + _LN_COVER_CUBE
    if side == UPPER:
        log_poly = log_p_max(inst.n, lam, gamma)
        log_linear_poly = log_poly
        # printed with 1/sqrt(gamma lam) where the composition gives 1/(gamma sqrt(lam))
        statement_shift = 0.5 * math.log(gamma)
    else:
        log_poly = log_p_min(lam)
        log_linear_poly = log_p_min_grouped(inst.n, lam, gamma)
        statement_shift = 0.0
    proof = scale + log_poly + 0.5 * log_x
    return {
        "linear": scale + log_linear_poly + log_x,
        "proof": proof,
        "statement": proof + statement_shift,
    }


def _assemble(inst, side, form, lam, gamma, slope):
    require(form in PREFACTOR_FORMS, f"prefactor form must be one of {PREFACTOR_FORMS}: got {form}")
    prefactors = _log_prefactors(inst, side, lam, gamma)
    log_eig = prefactors[form] + inst.n * inst.epsilon * slope
    log_cover = log_covering_failure_bound(inst.k, inst.N)
    log_total = float(np.logaddexp(log_eig, log_cover))
    if log_total > 0.0:
        logger.info("%s tail bound %.3g exceeds 1 before clamping for %s", side, math.exp(log_total), inst)
        log_total = 0.0
    total = math.exp(log_total)
    if total == 0.0:
        logger.info("%s tail bound underflows; log10 value %.4g", side, log_total / math.log(10.0))
    return TailBound(
        instance=inst,
        side=side,
        prefactor_form=form,
        total=total,
        eig_term=math.exp(log_eig),
        cover_term=math.exp(log_cover),
        log_total=log_total,
        log_eig_term=log_eig,
        log_cover_term=log_cover,
        lambda_star=lam,
        gamma_used=gamma,
        psi_derivative=slope,
        log_prefactors=prefactors,
    )


def tail_prob_upper(inst, prefactor_form="linear"):
    """Bound on P(U(k, n, N) > U^BT(delta_n, rho_n) + eps)"""
    gamma, lam, _ = optimize_gamma_for_max(inst.shape)
    slope = dpsi_max_dlambda(lam, gamma)
    require(slope < 0.0, f"rate derivative must be negative at lambda_max={lam}")
    return _assemble(inst, UPPER, prefactor_form, lam, gamma, slope)


def tail_prob_lower(inst, prefactor_form="linear"):
    """Bound on P(L(k, n, N) > L^BT(delta_n, rho_n) + eps)"""
    gamma, lam, _ = optimize_gamma_for_min(inst.shape)
    require(lam > 0.0, f"lambda_min underflows for (k={inst.k}, n={inst.n}, N={inst.N}); L^BT is 1")
    slope = -dpsi_min_dlambda(lam, gamma)
    require(slope < 0.0, f"rate derivative must be positive at lambda_min={lam}")
    return _assemble(inst, LOWER, prefactor_form, lam, gamma, slope)


def tail_table(instances, side=UPPER, prefactor_form="linear"):
    """
    One row per instance in the published table layout (k, n, N, eps, prob,
    log10_prob), followed by the terms and solver values behind it.
    """
    require(side in (UPPER, LOWER), f"side must be '{UPPER}' or '{LOWER}': got {side}")
    solve = tail_prob_upper if side == UPPER else tail_prob_lower
    return [solve(inst, prefactor_form).as_row() for inst in instances]
