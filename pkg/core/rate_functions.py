"""
Scalar rate functions shared by the bound solvers and the finite-size tails.

All exponents are in nats. The functions are pure and work on Python floats;
the solvers call them millions of times, so they stay on the math module
instead of going through numpy scalars.
"""
import math
from dataclasses import dataclass
from typing import Optional

from scipy.special import gammaln

from core.errors import DomainError, require

LN_2PI_HALF = 0.5 * math.log(2.0 * math.pi)

# Stirling bracket constants: 16/25 <= C(N, pN) sqrt(2 pi p (1-p) N) e^{-N H(p)} <= 5/4
STIRLING_LOWER = 16.0 / 25.0
STIRLING_UPPER = 5.0 / 4.0


@dataclass(frozen=True)
class ProblemShape:
    """Proportional-growth coordinates delta = n/N, rho = k/n and group ratio gamma = m/n"""

    delta: float
    rho: float
    gamma: Optional[float] = None

    def __post_init__(self):
        require(0.0 < self.delta < 1.0, f"delta must lie in (0, 1): got {self.delta}")
        require(0.0 < self.rho < 1.0, f"rho must lie in (0, 1): got {self.rho}")
        if self.gamma is not None:
            require(
                self.rho <= self.gamma <= 1.0 / self.delta,
                f"gamma must lie in [rho, 1/delta] = [{self.rho}, {1.0 / self.delta}]: got {self.gamma}",
            )

    def with_gamma(self, gamma):
        return ProblemShape(self.delta, self.rho, gamma)

    def require_gamma(self):
        if self.gamma is None:
            raise DomainError("this operation needs a shape with gamma set")
        return self.gamma


def shannon_entropy(p):
    """H(p) = p ln(1/p) + (1-p) ln(1/(1-p)); zero at both endpoints"""
    require(0.0 <= p <= 1.0, f"entropy argument must lie in [0, 1]: got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    q = 1.0 - p
    return -p * math.log(p) - q * math.log(q)


def psi_max(lam, gamma):
    """Exponent of the largest-eigenvalue density bound"""
    require(lam > 0.0, f"lambda must be positive: got {lam}")
    require(gamma > 0.0, f"gamma must be positive: got {gamma}")
    return 0.5 * ((1.0 + gamma) * math.log(lam) - gamma * math.log(gamma) + 1.0 + gamma - lam)


def psi_min(lam, gamma):
    """Exponent of the smallest-eigenvalue density bound, defined for gamma in (0, 1)"""
    require(lam > 0.0, f"lambda must be positive: got {lam}")
    require(0.0 < gamma < 1.0, f"gamma must lie in (0, 1) for the smallest eigenvalue: got {gamma}")
    return shannon_entropy(gamma) + 0.5 * (
        (1.0 - gamma) * math.log(lam) + gamma * math.log(gamma) + 1.0 - gamma - lam
    )


def dpsi_max_dlambda(lam, gamma):
    return 0.5 * ((1.0 + gamma) / lam - 1.0)


def dpsi_min_dlambda(lam, gamma):
    return 0.5 * ((1.0 - gamma) / lam - 1.0)


def combinatorial_exponent(delta, rho, gamma):
    """H(rho delta) - delta gamma H(rho/gamma): the per-n growth of the number of groups"""
    ratio = rho / gamma
    if ratio > 1.0:
        raise DomainError(f"rho/gamma must not exceed 1: got {ratio}")
    return shannon_entropy(rho * delta) - delta * gamma * shannon_entropy(ratio)


def net_exponent_max(lam, shape):
    """delta psi_max(lam, gamma) + H(rho delta) - delta gamma H(rho/gamma)"""
    gamma = shape.require_gamma()
    return shape.delta * psi_max(lam, gamma) + combinatorial_exponent(shape.delta, shape.rho, gamma)


def net_exponent_min(lam, shape):
    """delta psi_min(lam, gamma) + H(rho delta) - delta gamma H(rho/gamma)"""
    gamma = shape.require_gamma()
    return shape.delta * psi_min(lam, gamma) + combinatorial_exponent(shape.delta, shape.rho, gamma)


def log_binomial(n, k):
    """ln C(n, k) through log-gamma; exact enough for exponents, not for counting"""
    require(0 <= k <= n, f"binomial needs 0 <= k <= n: got n={n}, k={k}")
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def log_binomial_bounds(N, p):
    """
    Stirling bracket for ln C(N, pN).

    Returns (lower, upper) with lower <= ln C(N, pN) <= upper.
    """
    require(N >= 1, f"N must be a positive integer: got {N}")
    require(0.0 < p < 1.0, f"p must lie in (0, 1): got {p}")
    k = round(p * N)
    require(abs(p * N - k) < 1e-9 and 0 < k < N, f"p*N must be an integer in (0, N): got {p * N}")
    core = -0.5 * math.log(2.0 * math.pi * p * (1.0 - p) * N) + N * shannon_entropy(p)
    return math.log(STIRLING_LOWER) + core, math.log(STIRLING_UPPER) + core


def binet_log_gamma_lower(z):
    """(z - 1/2) ln z - z + ln sqrt(2 pi), a lower bound on ln Gamma(z)"""
    require(z > 0.0, f"z must be positive: got {z}")
    return (z - 0.5) * math.log(z) - z + LN_2PI_HALF
