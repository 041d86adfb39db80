"""
Random group covering of all k-subsets of {0, ..., N-1}.

Each drawn m-superset M covers the C(m, k) k-subsets it contains. Drawing
u = ceil(r N) supersets with r = C(N, k)/C(m, k) covers everything with
probability exponentially close to one.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np
from joblib import Parallel, delayed

from core.empirical_ric import seed_from
from core.errors import GuardError, require
from core.finite_tails import log_covering_failure_bound
from core.rate_functions import log_binomial, shannon_entropy

logger = logging.getLogger(__name__)

COVERING_GUARD = 10_000_000
EXACT_LIMIT = 2 ** 63


def min_group_count(N, k, m):
    """r = C(N, k) / C(m, k), the fewest groups that can cover every k-subset"""
    require(0 <= k <= m <= N, f"need 0 <= k <= m <= N: got N={N}, k={k}, m={m}")
    total = math.comb(N, k)
    if total <= EXACT_LIMIT:
        return float(Fraction(total, math.comb(m, k)))
    return math.exp(log_binomial(N, k) - log_binomial(m, k))


def default_draw_count(N, k, m):
    return max(1, math.ceil(min_group_count(N, k, m) * N))


def entropy_draw_count(N, k, m):
    """u just above r N H(k/N)"""
    return math.ceil(min_group_count(N, k, m) * N * shannon_entropy(k / N)) + 1


@dataclass(frozen=True)
class CoveringPlan:
    N: int
    k: int
    m: int
    u: int
    seed: int = 0

    def __post_init__(self):
        require(1 <= self.k <= self.m <= self.N, f"need 1 <= k <= m <= N: got N={self.N}, k={self.k}, m={self.m}")
        require(self.u >= 0, f"draw count must not be negative: got {self.u}")

    @property
    def r(self):
        return min_group_count(self.N, self.k, self.m)

    @classmethod
    def with_rule(cls, N, k, m, seed=0, rule="default"):
        if rule == "entropy":
            u = entropy_draw_count(N, k, m)
        else:
            require(rule == "default", f"unknown draw-count rule {rule!r}")
            u = default_draw_count(N, k, m)
        return cls(N=N, k=k, m=m, u=u, seed=seed)

    def with_draws(self, u):
        return CoveringPlan(self.N, self.k, self.m, u, self.seed)


class CoverResult(NamedTuple):
    covered: bool
    uncovered_count: int


@dataclass(frozen=True)
class CoveringSummary:
    plan: CoveringPlan
    trials: int
    failures: int
    frequency: float
    standard_error: float
    envelope_bound: float
    union_bound: float


def draw_supersets(plan):
    """u sorted m-subsets, drawn in sequence from the plan's stream"""
    rng = np.random.default_rng(plan.seed)
    draws = np.empty((plan.u, plan.m), dtype=np.int64)
    for i in range(plan.u):
        draws[i] = np.sort(rng.choice(plan.N, size=plan.m, replace=False))
    return draws


def _colex_table(N, k):
    """
    table[x, j] = C(x, j) wherever x can be the j-th smallest element of a
    sorted k-subset of range(N), i.e. j - 1 <= x <= N - k + j - 1. Every such
    entry is at most C(N, k); the rest stay 0.
    """
    table = np.zeros((N, k + 1), dtype=np.int64)
    for j in range(1, k + 1):
        for x in range(j, N - k + j):
            table[x, j] = math.comb(x, j)
    return table


def random_cover(plan, guard=COVERING_GUARD):
    """Whether the drawn groups cover all C(N, k) subsets, and how many they miss"""
    total = math.comb(plan.N, plan.k)
    if total > guard:
        raise GuardError(f"C({plan.N}, {plan.k}) = {total} subsets exceeds the covering guard {guard}",
                         count=total, limit=guard)

    covered = np.zeros(total, dtype=bool)
    if plan.u:
        table = _colex_table(plan.N, plan.k)
        columns = np.arange(1, plan.k + 1)
        local = np.array(list(itertools.combinations(range(plan.m), plan.k)), dtype=np.int64)
        for superset in draw_supersets(plan):
            # colex rank of a sorted subset c_1 < ... < c_k is sum_i C(c_i, i)
            members = superset[local]
            covered[table[members, columns].sum(axis=1)] = True

    uncovered = int(total - covered.sum())
    return CoverResult(covered=uncovered == 0, uncovered_count=uncovered)


def log_covering_bound(plan):
    return log_covering_failure_bound(plan.k, plan.N)


def covering_bound(plan):
    """(5/4)(2 pi k (1 - k/N))^{-1/2} e^{-N(1 - ln 2)}, the envelope on P(cover fails)"""
    require(plan.k < plan.N, f"need k < N for the covering bound: got k={plan.k}, N={plan.N}")
    return math.exp(log_covering_bound(plan))


def union_bound(plan):
    """min(1, C(N, k) e^{-u/r}), the bound before the Stirling envelope"""
    log_value = log_binomial(plan.N, plan.k) - plan.u / plan.r
    return math.exp(min(0.0, log_value))


def _trial(plan, sequence, guard):
    return random_cover(CoveringPlan(plan.N, plan.k, plan.m, plan.u, seed_from(sequence)), guard)


def covering_trials(plan, trials=1000, seed: Optional[int] = None, guard=COVERING_GUARD, n_jobs=1):
    """Monte-Carlo failure frequency of random_cover with one stream per trial"""
    require(trials >= 1, f"trials must be positive: got {trials}")
    root = np.random.SeedSequence(plan.seed if seed is None else seed)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_trial)(plan, child, guard) for child in root.spawn(trials)
    )
    failures = sum(1 for result in results if not result.covered)
    frequency = failures / trials
    summary = CoveringSummary(
        plan=plan,
        trials=trials,
        failures=failures,
        frequency=frequency,
        standard_error=math.sqrt(frequency * (1.0 - frequency) / trials),
        envelope_bound=covering_bound(plan) if plan.k < plan.N else 0.0,
        union_bound=union_bound(plan),
    )
    logger.info("covering (N=%d, k=%d, m=%d, u=%d): %d/%d failures", plan.N, plan.k, plan.m, plan.u,
                failures, trials)
    return summary
