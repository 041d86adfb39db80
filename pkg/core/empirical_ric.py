"""
Empirical restricted isometry constants of sampled Gaussian matrices.

Exact values come from enumerating every k-column support on tiny
instances; at moderate scale a restarted single-swap local search gives
lower bounds on the true constants.

Random streams: numpy's PCG64 (default_rng) seeded from SeedSequence
children, one per matrix draw and per restart, so results replay
regardless of how work is scheduled.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from core.asymptotic_bounds import BOUNDARY_MARGIN, GAMMA_TOL, bt_bounds
from core.errors import GuardError, SolverError, require
from core.rate_functions import ProblemShape

logger = logging.getLogger(__name__)

DENSE_EIG_LIMIT = 64
EIGSH_TOL = 1e-10
EXHAUSTIVE_GUARD = 1_000_000
CANDIDATE_POOL = 32
REMOVAL_POOL = 8
FULL_SWAP_LIMIT = 16
IMPROVEMENT_TOL = 1e-9
_BATCH = 4096
# Gram entries per eigvalsh batch in exhaustive_ric
_BATCH_ENTRIES = 1 << 20


class Mode(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class MatrixSample:
    """n x N matrix with i.i.d. N(0, 1/n) entries drawn from a seeded stream"""

    n: int
    N: int
    seed: int
    entries: np.ndarray = field(repr=False, compare=False)

    def columns(self, support):
        return self.entries[:, list(support)]


@dataclass(frozen=True)
class EmpiricalRun:
    n: int
    N: int
    seed: int
    k: int
    mode: Mode
    best_support: Tuple[int, ...]
    extreme_eig: float
    estimate: float
    restarts: int
    swaps_taken: int


class ExhaustiveRic(NamedTuple):
    L: float
    U: float
    argmax_support: Tuple[int, ...]
    argmin_support: Tuple[int, ...]


@dataclass(frozen=True)
class EmpiricalCell:
    n: int
    N: int
    k: int
    count: int
    u_max: float
    u_mean: float
    l_max: float
    l_mean: float


def _seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def seed_from(sequence):
    """A 64-bit integer seed that recreates a SeedSequence child's stream"""
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_gaussian(n, N, seed):
    require(n >= 1 and N >= 1, f"matrix dimensions must be positive: got n={n}, N={N}")
    rng = np.random.default_rng(seed)
    entries = rng.standard_normal((n, N)) / math.sqrt(n)
    return MatrixSample(n=n, N=N, seed=int(seed), entries=entries)


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------

def _eigsh(gram, which, return_eigenvectors=True):
    try:
        return eigsh(gram, k=1, which=which, tol=EIGSH_TOL, return_eigenvectors=return_eigenvectors)
    except ArpackNoConvergence as exc:
        raise SolverError(f"ARPACK did not converge for the {which} eigenvalue of a {gram.shape[0]}-square Gram matrix") from exc


def _extreme_pair(gram, mode):
    """Extreme eigenvalue and unit eigenvector of a symmetric matrix"""
    k = gram.shape[0]
    if k <= DENSE_EIG_LIMIT:
        w, v = np.linalg.eigh(gram)
        i = 0 if mode is Mode.LOWER else -1
        return float(w[i]), v[:, i]
    which = "SA" if mode is Mode.LOWER else "LA"
    w, v = _eigsh(gram, which)
    return float(w[0]), v[:, 0]


def _gram_extremes(gram):
    k = gram.shape[0]
    if k <= DENSE_EIG_LIMIT:
        w = np.linalg.eigvalsh(gram)
        return float(w[0]), float(w[-1])
    lo = _eigsh(gram, "SA", return_eigenvectors=False)
    hi = _eigsh(gram, "LA", return_eigenvectors=False)
    return float(lo[0]), float(hi[0])


def gram_extreme_eigs(columns):
    """(lambda_min, lambda_max) of the k x k Gram matrix of an n x k column block"""
    cols = np.asarray(columns, dtype=float)
    require(cols.ndim == 2 and cols.shape[1] >= 1, f"expected an n x k matrix: got shape {cols.shape}")
    n, k = cols.shape
    lam_min, lam_max = _gram_extremes(cols.T @ cols)
    if k > n:
        logger.warning("Gram matrix of %d columns in dimension %d is rank deficient; lambda_min set to 0", k, n)
        lam_min = 0.0
    return lam_min, lam_max


# ---------------------------------------------------------------------------
# Exhaustive enumeration
# ---------------------------------------------------------------------------

def exhaustive_ric(sample, k, guard=EXHAUSTIVE_GUARD):
    """Exact (L, U) over all C(N, k) supports, enumerated lexicographically"""
    require(1 <= k <= sample.N, f"need 1 <= k <= N: got k={k}, N={sample.N}")
    count = math.comb(sample.N, k)
    if count > guard:
        raise GuardError(f"C({sample.N}, {k}) = {count} supports exceeds the enumeration guard {guard}",
                         count=count, limit=guard)

    gram = sample.entries.T @ sample.entries
    best_max, best_min = -math.inf, math.inf
    arg_max = arg_min = None
    supports = itertools.combinations(range(sample.N), k)
    size = max(1, min(_BATCH, _BATCH_ENTRIES // (k * k)))
    while True:
        batch = list(itertools.islice(supports, size))
        if not batch:
            break
        idx = np.array(batch)
        blocks = gram[idx[:, :, None], idx[:, None, :]]
        w = np.linalg.eigvalsh(blocks)
        i = int(np.argmax(w[:, -1]))
        if w[i, -1] > best_max:
            best_max, arg_max = float(w[i, -1]), batch[i]
        i = int(np.argmin(w[:, 0]))
        if w[i, 0] < best_min:
            best_min, arg_min = float(w[i, 0]), batch[i]

    logger.debug("enumerated %d supports of size %d", count, k)
    return ExhaustiveRic(L=1.0 - best_min, U=best_max - 1.0, argmax_support=arg_max, argmin_support=arg_min)


# ---------------------------------------------------------------------------
# Local search
# ---------------------------------------------------------------------------

def _swap_values(gram, cross, norms, positions, mode):
    """
    Extreme eigenvalue after replacing support position p with candidate c,
    for every (c, p); returns an array of shape (len(norms), len(positions)).
    """
    k = gram.shape[0]
    values = np.empty((len(norms), len(positions)))
    stack = []
    for c in range(len(norms)):
        for p in positions:
            g = gram.copy()
            g[p, :] = cross[:, c]
            g[:, p] = cross[:, c]
            g[p, p] = norms[c]
            stack.append(g)
    if k <= DENSE_EIG_LIMIT:
        w = np.linalg.eigvalsh(np.array(stack))
        flat = w[:, 0] if mode is Mode.LOWER else w[:, -1]
    else:
        flat = np.array([_extreme_pair(g, mode)[0] for g in stack])
    values[:] = flat.reshape(len(norms), len(positions))
    return values


def _climb(entries, k, mode, sequence, candidate_pool, removal_pool, tol):
    rng = np.random.default_rng(sequence)
    N = entries.shape[1]
    support = np.sort(rng.choice(N, size=k, replace=False))
    sign = 1.0 if mode is Mode.UPPER else -1.0
    swaps = 0

    while True:
        cols = entries[:, support]
        gram = cols.T @ cols
        value, vec = _extreme_pair(gram, mode)

        u = cols @ vec
        norm = np.linalg.norm(u)
        outside = np.setdiff1d(np.arange(N), support, assume_unique=True)
        if norm > 0.0:
            scores = np.abs(entries[:, outside].T @ (u / norm))
            order = np.argsort(-scores, kind="stable")
        else:
            order = np.arange(len(outside))
        candidates = outside[order[:candidate_pool]]

        if k <= FULL_SWAP_LIMIT:
            positions = list(range(k))
        else:
            positions = [int(p) for p in np.argsort(np.abs(vec), kind="stable")[:removal_pool]]

        block = entries[:, candidates]
        cross = cols.T @ block
        norms = np.einsum("ij,ij->j", block, block)
        values = _swap_values(gram, cross, norms, positions, mode)
        gains = sign * (values - value)
        c, p = np.unravel_index(int(np.argmax(gains)), gains.shape)
        if gains[c, p] <= tol:
            return value, tuple(int(i) for i in support), swaps

        support = support.copy()
        support[positions[p]] = candidates[c]
        support.sort()
        swaps += 1


def local_search(sample, k, mode, restarts=100, seed=0, candidate_pool=CANDIDATE_POOL,
                 removal_pool=REMOVAL_POOL, tol=IMPROVEMENT_TOL, n_jobs=1):
    """
    Restarted steepest single-swap search for the support with the most
    extreme Gram eigenvalue; returns the best run over all restarts.
    """
    mode = Mode(mode)
    require(1 <= k < sample.N, f"need 1 <= k < N: got k={k}, N={sample.N}")
    require(restarts >= 1, f"restarts must be positive: got {restarts}")
    children = _seed_sequence(seed).spawn(restarts)
    climbs = Parallel(n_jobs=n_jobs)(
        delayed(_climb)(sample.entries, k, mode, child, candidate_pool, removal_pool, tol)
        for child in children
    )

    best = None
    total_swaps = 0
    for value, support, swaps in climbs:
        total_swaps += swaps
        if best is None or (value > best[0] if mode is Mode.UPPER else value < best[0]):
            best = (value, support)

    value, support = best
    estimate = value - 1.0 if mode is Mode.UPPER else 1.0 - value
    logger.debug("local search %s k=%d: %r after %d restarts", mode.value, k, estimate, restarts)
    return EmpiricalRun(
        n=sample.n,
        N=sample.N,
        seed=sample.seed,
        k=k,
        mode=mode,
        best_support=support,
        extreme_eig=value,
        estimate=estimate,
        restarts=restarts,
        swaps_taken=total_swaps,
    )


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

def _draw_and_search(n, N, k, child, restarts, candidate_pool, removal_pool, tol):
    matrix_seq, upper_seq, lower_seq = child.spawn(3)
    sample = sample_gaussian(n, N, seed_from(matrix_seq))
    upper = local_search(sample, k, Mode.UPPER, restarts, upper_seq, candidate_pool, removal_pool, tol)
    lower = local_search(sample, k, Mode.LOWER, restarts, lower_seq, candidate_pool, removal_pool, tol)
    return upper.estimate, lower.estimate


def empirical_cell(n, N, k, samples=1, restarts=100, root_seed=0, candidate_pool=CANDIDATE_POOL,
                   removal_pool=REMOVAL_POOL, tol=IMPROVEMENT_TOL, n_jobs=1):
    """Local-search estimates over several matrix draws, reduced to max, mean and count"""
    require(samples >= 1, f"samples must be positive: got {samples}")
    children = _seed_sequence(root_seed).spawn(samples)
    pairs = Parallel(n_jobs=n_jobs)(
        delayed(_draw_and_search)(n, N, k, child, restarts, candidate_pool, removal_pool, tol)
        for child in children
    )
    u = np.array([p[0] for p in pairs])
    lo = np.array([p[1] for p in pairs])
    return EmpiricalCell(
        n=n, N=N, k=k, count=len(pairs),
        u_max=float(u.max()), u_mean=float(u.mean()),
        l_max=float(lo.max()), l_mean=float(lo.mean()),
    )


@dataclass(frozen=True)
class SharpnessRatio:
    ratio_U: Optional[float]
    ratio_L: Optional[float]
    U_bound: float
    L_bound: float
    cell: EmpiricalCell


def sharpness_ratio(n, N, k, samples=1, restarts=100, root_seed=0, n_jobs=1, boundary_margin=BOUNDARY_MARGIN,
                    gamma_tol=GAMMA_TOL, **search):
    """
    BT bound over the empirical estimate at matching (k, n, N); a ratio is
    None when its estimate is not positive.
    """
    bound = bt_bounds(ProblemShape(n / N, k / n), boundary_margin, tol=gamma_tol)
    cell = empirical_cell(n, N, k, samples, restarts, root_seed, n_jobs=n_jobs, **search)
    ratio_u = ratio_l = None
    if cell.u_max > 0.0:
        ratio_u = bound.U / cell.u_max
    else:
        logger.warning("upper estimate %r is not positive at (k=%d, n=%d, N=%d)", cell.u_max, k, n, N)
    if cell.l_max > 0.0:
        ratio_l = bound.L / cell.l_max
    else:
        logger.warning("lower estimate %r is not positive at (k=%d, n=%d, N=%d)", cell.l_max, k, n, N)
    return SharpnessRatio(ratio_U=ratio_u, ratio_L=ratio_l, U_bound=bound.U, L_bound=bound.L, cell=cell)
