"""
Asymptotic bounds on the restricted isometry constants of Gaussian matrices.

Three families are computed for a point (delta, rho) of the proportional-growth
plane:

  - BT: union bound over groups of supports sharing an m-superset, with the
    group ratio gamma = m/n optimized separately for each side;
  - BCT: the same implicit equations at gamma = rho, with the upper bound
    improved by monotonicity in k (minimum over nu in [rho, 1]);
  - CT: closed forms from concentration of measure.

The implicit equations are solved by bracket expansion and a bracketing root
finder; the gamma optimization is a golden-section search whose result is
polished on the first-order stationarity condition.
"""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import brentq

from core.errors import ConstraintViolation, DomainError, SolverError, require
from core.rate_functions import (
    ProblemShape,
    combinatorial_exponent,
    psi_max,
    psi_min,
    shannon_entropy,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-12
GAMMA_TOL = 1e-10
LAMBDA_CEILING = 1e9
LAMBDA_FLOOR = 1e-300
BOUNDARY_MARGIN = 1e-6
GAMMA_CAP_MARGIN = 1e-9
PHASE_TOL = 1e-8
PHASE_RHO_FLOOR = 1e-12
L1_THRESHOLD = math.sqrt(2.0) - 1.0
# lambda is flat near its optimum; the stationarity root wins ties within this
FLAT_TOP_RTOL = 1e-12

_RTOL = 4.0 * np.finfo(float).eps
_XTOL = 1e-300
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


class Family(str, Enum):
    BT = "BT"
    BCT = "BCT"
    CT = "CT"


@dataclass(frozen=True)
class AsymptoticBound:
    """
    Solved extreme-eigenvalue levels and the derived RIC bounds.

    gamma_at_min_opt is the gamma maximizing lambda_min (gamma_max) and
    gamma_at_max_opt the gamma minimizing lambda_max (gamma_min).
    """

    shape: ProblemShape
    family: Family
    lambda_min: float
    lambda_max: float
    gamma_at_min_opt: Optional[float]
    gamma_at_max_opt: Optional[float]
    L: float
    U: float
    nu_opt: Optional[float] = None
    upper_on_boundary: bool = False
    lower_on_boundary: bool = False

    @property
    def gamma_min(self):
        return self.gamma_at_max_opt

    @property
    def gamma_max(self):
        return self.gamma_at_min_opt

    def as_row(self):
        return {
            "delta": self.shape.delta,
            "rho": self.shape.rho,
            "family": self.family.value,
            "L": self.L,
            "U": self.U,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "gamma_min": self.gamma_min,
            "gamma_max": self.gamma_max,
            "nu_opt": self.nu_opt,
        }


@dataclass(frozen=True)
class PhasePoint:
    delta: float
    family: Family
    rho_star: float
    feasible: bool
    monotone_checked: bool = True

    @property
    def inverse(self):
        return 1.0 / self.rho_star if self.feasible and self.rho_star > 0 else None


def check_interior(shape, margin=BOUNDARY_MARGIN):
    """Reject points within margin of the edges of the unit square"""
    for name, value in (("delta", shape.delta), ("rho", shape.rho)):
        if value < margin or value > 1.0 - margin:
            raise DomainError(f"{name} must lie at least {margin} away from 0 and 1: got {value}")


# ---------------------------------------------------------------------------
# Implicit equations
# ---------------------------------------------------------------------------

def _upper_root(delta, rho, gamma, ceiling=LAMBDA_CEILING, tol=RESIDUAL_TOL):
    comb = combinatorial_exponent(delta, rho, gamma)

    def exponent(lam):
        return delta * psi_max(lam, gamma) + comb

    lo = 1.0 + gamma
    f_lo = exponent(lo)
    if f_lo < 0.0:
        raise ConstraintViolation(
            f"net exponent is negative at lambda = 1 + gamma for (delta={delta}, rho={rho}, gamma={gamma})"
        )
    if f_lo == 0.0:
        return lo
    hi = 2.0 * lo
    expansions = 0
    while exponent(hi) >= 0.0:
        lo, hi = hi, 2.0 * hi
        expansions += 1
        if hi > ceiling:
            raise SolverError(f"no sign change for lambda_max below {ceiling} at (delta={delta}, rho={rho}, gamma={gamma})")
    root = brentq(exponent, lo, hi, xtol=_XTOL, rtol=_RTOL, maxiter=500)
    residual = abs(exponent(root))
    logger.debug("lambda_max=%r after %d expansions, residual %.3g", root, expansions, residual)
    if residual > tol:
        logger.warning("lambda_max residual %.3g exceeds %.3g at gamma=%r", residual, tol, gamma)
    return root


def _lower_root(delta, rho, gamma, floor=LAMBDA_FLOOR, tol=RESIDUAL_TOL):
    comb = combinatorial_exponent(delta, rho, gamma)

    def exponent(lam):
        return delta * psi_min(lam, gamma) + comb

    hi = 1.0 - gamma
    f_hi = exponent(hi)
    if f_hi < 0.0:
        raise ConstraintViolation(
            f"net exponent is negative at lambda = 1 - gamma for (delta={delta}, rho={rho}, gamma={gamma})"
        )
    if f_hi == 0.0:
        return hi
    lo = 0.5 * hi
    contractions = 0
    while exponent(lo) >= 0.0:
        lo, hi = 0.5 * lo, lo
        contractions += 1
        if lo < floor:
            raise SolverError(f"no sign change for lambda_min above {floor} at (delta={delta}, rho={rho}, gamma={gamma})")
    root = brentq(exponent, lo, hi, xtol=_XTOL, rtol=_RTOL, maxiter=500)
    residual = abs(exponent(root))
    logger.debug("lambda_min=%r after %d contractions, residual %.3g", root, contractions, residual)
    if residual > tol:
        logger.warning("lambda_min residual %.3g exceeds %.3g at gamma=%r", residual, tol, gamma)
    return root


def lower_level(delta, rho, gamma):
    """_lower_root, with a root below LAMBDA_FLOOR reported as 0 (L = 1)"""
    try:
        return _lower_root(delta, rho, gamma)
    except SolverError:
        logger.debug("lambda_min underflows at (delta=%r, rho=%r, gamma=%r); using 0", delta, rho, gamma)
        return 0.0


def solve_lambda_max(shape, ceiling=LAMBDA_CEILING):
    """Root lambda >= 1 + gamma of net_exponent_max for a shape with gamma set"""
    gamma = shape.require_gamma()
    return _upper_root(shape.delta, shape.rho, gamma, ceiling=ceiling)


def solve_lambda_min(shape, floor=LAMBDA_FLOOR):
    """Root lambda in (0, 1 - gamma] of net_exponent_min; gamma must be below 1"""
    gamma = shape.require_gamma()
    require(gamma < 1.0, f"gamma must be below 1 for lambda_min: got {gamma}")
    return _lower_root(shape.delta, shape.rho, gamma, floor=floor)


# ---------------------------------------------------------------------------
# Golden-section search
# ---------------------------------------------------------------------------

def golden_section(f, a, b, tol):
    """
    Golden-section search for the minimum of a unimodal f on [a, b].

    Returns (lo, hi, x_best, f_best): a bracket of width <= tol and the best
    point evaluated along the way.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    fa, fb = f(a), f(b)
    best = (a, fa) if fa <= fb else (b, fb)
    if h <= tol:
        return a, b, best[0], best[1]

    steps = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    for x, y in ((c, yc), (d, yd)):
        if y < best[1]:
            best = (x, y)

    for _ in range(steps - 1):
        if yc <= yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI_SQ * h
            yc = f(c)
            if yc < best[1]:
                best = (c, yc)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
            if yd < best[1]:
                best = (d, yd)

    if yc <= yd:
        return a, d, best[0], best[1]
    return c, b, best[0], best[1]


def _scan_then_golden(f, a, b, tol, points):
    """Coarse scan for the best cell, then golden-section inside it"""
    grid = np.linspace(a, b, points)
    values = [f(float(x)) for x in grid]
    i = int(np.argmin(values))
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, points - 1)])
    _, _, x, y = golden_section(f, lo, hi, tol)
    if values[i] < y:
        return float(grid[i]), values[i]
    return x, y


def _polish(stationarity, lo, hi, a, b):
    """
    Root of the stationarity function near the golden-section bracket [a, b].

    The bracket is widened until the function changes sign from negative to
    positive; None when no sign change is found inside [lo, hi].
    """
    centre = 0.5 * (a + b)
    width = max(b - a, 1e-14)
    for factor in (1.0, 10.0, 100.0, 1e3, 1e4, 1e5):
        left = max(lo, centre - factor * width)
        right = min(hi, centre + factor * width)
        try:
            s_left, s_right = stationarity(left), stationarity(right)
            if s_left < 0.0 < s_right:
                return brentq(stationarity, left, right, xtol=_XTOL, rtol=_RTOL, maxiter=500)
        except (ValueError, ArithmeticError):
            continue
    return None


def optimize_gamma_for_max(shape, tol=GAMMA_TOL, ceiling=LAMBDA_CEILING):
    """
    Minimize lambda_max(delta, rho; gamma) over gamma in [rho, 1/delta].

    Returns (gamma_min, lambda_max_star, on_boundary).
    """
    delta, rho = shape.delta, shape.rho
    lo, hi = rho, 1.0 / delta

    def level(gamma):
        return _upper_root(delta, rho, gamma, ceiling=ceiling)

    a, b, g_best, l_best = golden_section(level, lo, hi, tol)

    def stationarity(gamma):
        # ln[lambda (gamma - rho)^2 / gamma^3]; sign of d lambda_max / d gamma
        return math.log(level(gamma)) + 2.0 * math.log(gamma - rho) - 3.0 * math.log(gamma)

    left = math.nextafter(lo, math.inf)
    polished = _polish(stationarity, left, hi, max(a, left), b)
    if polished is not None:
        l_polished = level(polished)
        if l_polished <= l_best * (1.0 + FLAT_TOP_RTOL):
            g_best, l_best = polished, l_polished

    l_rho = level(lo)
    if l_rho < l_best:
        g_best, l_best = lo, l_rho

    on_boundary = polished is None and hi - g_best <= 10.0 * tol
    if on_boundary:
        logger.info("gamma_min sits on the right end 1/delta=%r for (delta=%r, rho=%r)", hi, delta, rho)
    return g_best, l_best, on_boundary


def optimize_gamma_for_min(shape, tol=GAMMA_TOL, cap_margin=GAMMA_CAP_MARGIN):
    """
    Maximize lambda_min(delta, rho; gamma) over gamma in [rho, min(1, 1/delta) - cap].

    Returns (gamma_max, lambda_min_star, on_boundary).
    """
    delta, rho = shape.delta, shape.rho
    lo, hi = rho, min(1.0, 1.0 / delta) - cap_margin
    require(hi > lo, f"rho={rho} leaves no room for gamma below 1")

    def level(gamma):
        return _lower_root(delta, rho, gamma)

    # near gamma = 1 the root drops below the smallest double
    a, b, g_best, neg_best = golden_section(lambda g: -lower_level(delta, rho, g), lo, hi, tol)
    l_best = -neg_best

    def stationarity(gamma):
        # ln[gamma^3 lambda / ((1 - gamma)^2 (gamma - rho)^2)] decreases through zero
        return -(3.0 * math.log(gamma) + math.log(level(gamma))
                 - 2.0 * math.log(1.0 - gamma) - 2.0 * math.log(gamma - rho))

    left = math.nextafter(lo, math.inf)
    polished = _polish(stationarity, left, hi, max(a, left), b)
    if polished is not None:
        l_polished = level(polished)
        if l_polished >= l_best * (1.0 - FLAT_TOP_RTOL):
            g_best, l_best = polished, l_polished

    l_rho = lower_level(delta, rho, lo)
    if l_rho > l_best:
        g_best, l_best = lo, l_rho

    on_boundary = polished is None and g_best - lo <= 10.0 * tol
    if on_boundary:
        logger.info("gamma_max is indistinguishable from rho for (delta=%r, rho=%r)", delta, rho)
    return g_best, l_best, on_boundary


# ---------------------------------------------------------------------------
# Bound families
# ---------------------------------------------------------------------------

def bt_bounds(shape, boundary_margin=BOUNDARY_MARGIN, tol=GAMMA_TOL):
    """Bounds with the group ratio gamma optimized on each side"""
    check_interior(shape, boundary_margin)
    gamma_min, lambda_max, upper_edge = optimize_gamma_for_max(shape, tol=tol)
    gamma_max, lambda_min, lower_edge = optimize_gamma_for_min(shape, tol=tol)
    return AsymptoticBound(
        shape=ProblemShape(shape.delta, shape.rho),
        family=Family.BT,
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        gamma_at_min_opt=gamma_max,
        gamma_at_max_opt=gamma_min,
        L=1.0 - lambda_min,
        U=lambda_max - 1.0,
        upper_on_boundary=upper_edge,
        lower_on_boundary=lower_edge,
    )


def bct_lambda_max(delta, nu):
    """lambda_max(delta, nu) of the ungrouped union bound; nu may reach 1"""
    require(0.0 < nu <= 1.0, f"nu must lie in (0, 1]: got {nu}")
    return _upper_root(delta, nu, nu)


def bct_bounds(shape, boundary_margin=BOUNDARY_MARGIN, tol=GAMMA_TOL, scan_points=64):
    """Ungrouped bounds; the upper one minimized over nu in [rho, 1]"""
    check_interior(shape, boundary_margin)
    delta, rho = shape.delta, shape.rho
    lambda_min = lower_level(delta, rho, rho)
    nu_opt, lambda_max = _scan_then_golden(lambda nu: bct_lambda_max(delta, nu), rho, 1.0, tol, scan_points)
    at_rho = bct_lambda_max(delta, rho)
    if at_rho <= lambda_max:
        nu_opt, lambda_max = rho, at_rho
    return AsymptoticBound(
        shape=ProblemShape(delta, rho),
        family=Family.BCT,
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        gamma_at_min_opt=rho,
        gamma_at_max_opt=rho,
        L=1.0 - lambda_min,
        U=lambda_max - 1.0,
        nu_opt=nu_opt,
    )


def ct_bounds(shape, boundary_margin=BOUNDARY_MARGIN):
    """Closed-form concentration-of-measure bounds"""
    check_interior(shape, boundary_margin)
    delta, rho = shape.delta, shape.rho
    spread = math.sqrt(2.0 * shannon_entropy(delta * rho) / delta)
    upper_root = 1.0 + math.sqrt(rho) + spread
    lower_root = 1.0 - math.sqrt(rho) - spread
    lambda_max = upper_root ** 2
    lambda_min = max(0.0, lower_root) ** 2
    return AsymptoticBound(
        shape=ProblemShape(delta, rho),
        family=Family.CT,
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        gamma_at_min_opt=None,
        gamma_at_max_opt=None,
        L=1.0 - lambda_min,
        U=lambda_max - 1.0,
    )


def bt_monotone_upper(shape, boundary_margin=BOUNDARY_MARGIN, tol=1e-8, scan_points=16):
    """
    BT bounds with the upper side also minimized over nu in [rho, 1).

    U is monotone in k, so any bound at a larger sparsity ratio nu bounds U at rho.
    """
    base = bt_bounds(shape, boundary_margin, tol=GAMMA_TOL)
    delta = shape.delta
    nu_hi = 1.0 - max(boundary_margin, GAMMA_CAP_MARGIN)

    def upper_level(nu):
        return optimize_gamma_for_max(ProblemShape(delta, nu))[1]

    nu_opt, lambda_max = _scan_then_golden(upper_level, shape.rho, nu_hi, tol, scan_points)
    if base.lambda_max <= lambda_max:
        return replace(base, nu_opt=shape.rho)
    gamma_min = optimize_gamma_for_max(ProblemShape(delta, nu_opt))[0]
    return replace(base, lambda_max=lambda_max, U=lambda_max - 1.0, nu_opt=nu_opt, gamma_at_max_opt=gamma_min)


def bounds_for(shape, family, boundary_margin=BOUNDARY_MARGIN, monotone_fix=False, tol=GAMMA_TOL):
    family = Family(family)
    if family is Family.BT:
        if monotone_fix:
            return bt_monotone_upper(shape, boundary_margin)
        return bt_bounds(shape, boundary_margin, tol=tol)
    if family is Family.BCT:
        return bct_bounds(shape, boundary_margin, tol=tol)
    return ct_bounds(shape, boundary_margin)


def stationarity_residuals(bound):
    """
    Relative residuals of the first-order conditions at the recorded optimal gammas.

    Returns (upper, lower); an entry is None when that optimizer sits on its
    search boundary or the family has no gamma optimization.
    """
    if bound.family is not Family.BT:
        return None, None
    rho = bound.shape.rho
    upper = lower = None
    g = bound.gamma_at_max_opt
    if not bound.upper_on_boundary and g > rho:
        upper = abs(bound.lambda_max * (g - rho) ** 2 / g ** 3 - 1.0)
    g = bound.gamma_at_min_opt
    if not bound.lower_on_boundary and g > rho:
        lower = abs(g ** 3 * bound.lambda_min / ((1.0 - g) ** 2 * (g - rho) ** 2) - 1.0)
    return upper, lower


# ---------------------------------------------------------------------------
# Derived quantities
# ---------------------------------------------------------------------------

def _l1_feasible(delta, rho, family):
    bound = bounds_for(ProblemShape(delta, rho), family, boundary_margin=0.0)
    return max(bound.L, bound.U) < L1_THRESHOLD


def l1_phase_transition(delta, family=Family.BT, tol=PHASE_TOL, checks=8):
    """
    Largest rho at which max(L, U) < sqrt(2) - 1 for the chosen bound family.

    Feasibility is assumed monotone in rho for the bisection and then sampled
    at `checks` points below the result.
    """
    require(0.0 < delta < 1.0, f"delta must lie in (0, 1): got {delta}")
    family = Family(family)
    lo, hi = PHASE_RHO_FLOOR, 1.0 - BOUNDARY_MARGIN
    if not _l1_feasible(delta, lo, family):
        logger.warning("no feasible rho above %g at delta=%r for %s", lo, delta, family.value)
        return PhasePoint(delta, family, 0.0, feasible=False)
    if _l1_feasible(delta, hi, family):
        return PhasePoint(delta, family, hi, feasible=True)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _l1_feasible(delta, mid, family):
            lo = mid
        else:
            hi = mid

    monotone = all(
        _l1_feasible(delta, float(r), family)
        for r in np.geomspace(max(lo * 1e-3, PHASE_RHO_FLOOR), lo, checks)
    )
    if not monotone:
        logger.warning("feasibility is not monotone below rho=%r at delta=%r", lo, delta)
    return PhasePoint(delta, family, lo, feasible=True, monotone_checked=monotone)


def phase_curve(deltas, family=Family.BT, tol=PHASE_TOL, n_jobs=1):
    """rho_star for every delta, in input order"""
    return Parallel(n_jobs=n_jobs)(
        delayed(l1_phase_transition)(float(d), family, tol) for d in deltas
    )


def _ratio_pair(delta, rho):
    shape = ProblemShape(delta, rho)
    bt = bt_bounds(shape)
    bct = bct_bounds(shape)
    return bct.U / bt.U, bct.L / bt.L


def improvement_ratios(rho, deltas, n_jobs=1):
    """
    Extremes over delta of U^BCT/U^BT and L^BCT/L^BT at fixed rho.

    Returns a dict with u_ratio_min, u_ratio_max, l_ratio_min, l_ratio_max.
    """
    pairs = Parallel(n_jobs=n_jobs)(delayed(_ratio_pair)(float(d), rho) for d in deltas)
    u_ratios = [p[0] for p in pairs]
    l_ratios = [p[1] for p in pairs]
    return {
        "rho": rho,
        "u_ratio_min": min(u_ratios),
        "u_ratio_max": max(u_ratios),
        "l_ratio_min": min(l_ratios),
        "l_ratio_max": max(l_ratios),
    }
