import itertools
import math

import numpy as np
import pytest

from core import empirical_ric as er
from core.errors import DomainError, GuardError, SolverError


def test_samples_replay_from_seed():
    a = er.sample_gaussian(20, 50, 7)
    b = er.sample_gaussian(20, 50, 7)
    c = er.sample_gaussian(20, 50, 8)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)
    assert a.entries.shape == (20, 50)


def test_sample_columns_have_unit_expected_norm():
    sample = er.sample_gaussian(200, 400, 1)
    norms = np.einsum("ij,ij->j", sample.entries, sample.entries)
    assert float(norms.mean()) == pytest.approx(1.0, abs=0.02)
    assert abs(float(sample.entries.mean())) < 0.01


def test_orthonormal_columns_have_unit_spectrum():
    lam_min, lam_max = er.gram_extreme_eigs(np.eye(5)[:, :3])
    assert lam_min == pytest.approx(1.0)
    assert lam_max == pytest.approx(1.0)


def test_repeated_column_spans_zero_to_two():
    v = np.array([3.0, 4.0, 0.0]) / 5.0
    lam_min, lam_max = er.gram_extreme_eigs(np.column_stack([v, v]))
    assert lam_min == pytest.approx(0.0, abs=1e-14)
    assert lam_max == pytest.approx(2.0)


def test_two_column_spectrum_matches_quadratic_formula():
    cols = np.array([[1.0, 0.5], [0.0, 2.0], [-1.0, 0.3], [0.2, 0.0]])
    a, b, c = cols[:, 0] @ cols[:, 0], cols[:, 0] @ cols[:, 1], cols[:, 1] @ cols[:, 1]
    mid, rad = (a + c) / 2.0, math.hypot((a - c) / 2.0, b)
    lam_min, lam_max = er.gram_extreme_eigs(cols)
    assert lam_min == pytest.approx(mid - rad, rel=1e-12)
    assert lam_max == pytest.approx(mid + rad, rel=1e-12)


def test_wide_block_is_rank_deficient():
    sample = er.sample_gaussian(3, 5, 2)
    lam_min, lam_max = er.gram_extreme_eigs(sample.entries)
    assert lam_min == 0.0
    assert lam_max > 0.0


def test_extremes_bracket_mean_eigenvalue_and_scale():
    cols = er.sample_gaussian(30, 10, 3).entries
    lam_min, lam_max = er.gram_extreme_eigs(cols)
    mean = float(np.trace(cols.T @ cols)) / 10
    assert lam_min <= mean <= lam_max
    scaled = er.gram_extreme_eigs(2.0 * cols)
    assert scaled[0] == pytest.approx(4.0 * lam_min, rel=1e-10)
    assert scaled[1] == pytest.approx(4.0 * lam_max, rel=1e-10)


def test_large_blocks_use_sparse_solver_consistently():
    cols = er.sample_gaussian(200, 80, 4).entries
    w = np.linalg.eigvalsh(cols.T @ cols)
    lam_min, lam_max = er.gram_extreme_eigs(cols)
    assert lam_min == pytest.approx(w[0], rel=1e-8)
    assert lam_max == pytest.approx(w[-1], rel=1e-8)


def test_gram_eigs_reject_vectors():
    with pytest.raises(DomainError):
        er.gram_extreme_eigs(np.ones(4))


def test_exhaustive_single_columns_are_column_norms():
    sample = er.sample_gaussian(10, 20, 5)
    norms = np.einsum("ij,ij->j", sample.entries, sample.entries)
    ric = er.exhaustive_ric(sample, 1)
    assert ric.U == pytest.approx(norms.max() - 1.0)
    assert ric.L == pytest.approx(1.0 - norms.min())
    assert ric.argmax_support == (int(np.argmax(norms)),)


def test_exhaustive_full_support_is_whole_gram():
    sample = er.sample_gaussian(4, 4, 6)
    lam_min, lam_max = er.gram_extreme_eigs(sample.entries)
    ric = er.exhaustive_ric(sample, 4)
    assert ric.U == pytest.approx(lam_max - 1.0)
    assert ric.L == pytest.approx(1.0 - lam_min)


def test_exhaustive_matches_brute_force_pairs():
    sample = er.sample_gaussian(6, 10, 11)
    best_max, best_min = -math.inf, math.inf
    for support in itertools.combinations(range(10), 2):
        w = np.linalg.eigvalsh(sample.columns(support).T @ sample.columns(support))
        best_max, best_min = max(best_max, w[-1]), min(best_min, w[0])
    ric = er.exhaustive_ric(sample, 2)
    assert ric.U == pytest.approx(best_max - 1.0, rel=1e-12)
    assert ric.L == pytest.approx(1.0 - best_min, rel=1e-12)
    assert ric.U >= 0.0 and ric.L >= 0.0


def test_exhaustive_guard_refuses_large_enumerations():
    sample = er.sample_gaussian(10, 40, 12)
    with pytest.raises(GuardError) as info:
        er.exhaustive_ric(sample, 10, guard=1000)
    assert info.value.count == math.comb(40, 10)
    assert info.value.limit == 1000



def test_exhaustive_result_does_not_depend_on_batch_size(monkeypatch):
    sample = er.sample_gaussian(8, 14, 12)
    whole = er.exhaustive_ric(sample, 3)
    monkeypatch.setattr(er, "_BATCH_ENTRIES", 7 * 9)
    batched = er.exhaustive_ric(sample, 3)
    assert batched.argmax_support == whole.argmax_support
    assert batched.argmin_support == whole.argmin_support
    assert batched.U == pytest.approx(whole.U, rel=1e-14)
    assert batched.L == pytest.approx(whole.L, rel=1e-14)


def test_sparse_solver_failure_is_a_solver_error(monkeypatch):
    def stalled(*args, **kwargs):
        raise er.ArpackNoConvergence("no convergence", np.empty(0), np.empty((0, 0)))

    monkeypatch.setattr(er, "eigsh", stalled)
    cols = er.sample_gaussian(100, 80, 3).entries
    with pytest.raises(SolverError):
        er.gram_extreme_eigs(cols)

def test_exhaustive_ignores_column_order():
    sample = er.sample_gaussian(6, 9, 13)
    perm = np.random.default_rng(0).permutation(9)
    shuffled = er.MatrixSample(6, 9, 13, sample.entries[:, perm])
    a = er.exhaustive_ric(sample, 3)
    b = er.exhaustive_ric(shuffled, 3)
    assert b.U == pytest.approx(a.U, rel=1e-12)
    assert b.L == pytest.approx(a.L, rel=1e-12)


def test_local_search_never_exceeds_exact_constants():
    sample = er.sample_gaussian(8, 16, 21)
    exact = er.exhaustive_ric(sample, 3)
    upper = er.local_search(sample, 3, "upper", restarts=5, seed=1)
    lower = er.local_search(sample, 3, er.Mode.LOWER, restarts=5, seed=1)
    assert upper.estimate <= exact.U + 1e-12
    assert lower.estimate <= exact.L + 1e-12
    assert len(upper.best_support) == 3
    assert list(upper.best_support) == sorted(upper.best_support)


def test_local_search_finds_exact_constant_on_small_instances():
    shapes = list(itertools.product((6, 8), (10, 12), (2, 3)))
    hits = 0
    for seed in range(20):
        n, N, k = shapes[seed % len(shapes)]
        sample = er.sample_gaussian(n, N, 100 + seed)
        exact = er.exhaustive_ric(sample, k)
        upper = er.local_search(sample, k, er.Mode.UPPER, restarts=100, seed=seed)
        lower = er.local_search(sample, k, er.Mode.LOWER, restarts=100, seed=seed)
        assert upper.estimate <= exact.U + 1e-9
        assert lower.estimate <= exact.L + 1e-9
        hits += abs(upper.estimate - exact.U) <= 1e-9 and abs(lower.estimate - exact.L) <= 1e-9
    assert hits >= 19



def test_local_search_is_near_exact_on_most_small_instances():
    shapes = list(itertools.product((6, 8, 10), (12, 14), (2, 3)))
    close = 0
    instances = 40
    for seed in range(instances):
        n, N, k = shapes[seed % len(shapes)]
        sample = er.sample_gaussian(n, N, 500 + seed)
        exact = er.exhaustive_ric(sample, k)
        upper = er.local_search(sample, k, er.Mode.UPPER, restarts=50, seed=seed)
        lower = er.local_search(sample, k, er.Mode.LOWER, restarts=50, seed=seed)
        close += upper.estimate >= 0.999 * exact.U and lower.estimate >= 0.999 * exact.L
    assert close >= 0.95 * instances

def test_more_restarts_never_lower_the_estimate():
    sample = er.sample_gaussian(20, 60, 31)
    estimates = [er.local_search(sample, 6, er.Mode.UPPER, restarts=r, seed=5).estimate for r in (1, 4, 16)]
    assert estimates == sorted(estimates)


def test_local_search_replays_and_validates():
    sample = er.sample_gaussian(20, 60, 32)
    a = er.local_search(sample, 6, er.Mode.LOWER, restarts=3, seed=9)
    b = er.local_search(sample, 6, er.Mode.LOWER, restarts=3, seed=9)
    assert a == b
    with pytest.raises(DomainError):
        er.local_search(sample, 60, er.Mode.UPPER)
    with pytest.raises(DomainError):
        er.local_search(sample, 6, er.Mode.UPPER, restarts=0)


def test_empirical_cell_reduces_samples():
    cell = er.empirical_cell(20, 60, 4, samples=3, restarts=2, root_seed=4)
    assert cell.count == 3
    assert cell.u_max >= cell.u_mean > 0.0
    assert cell.l_max >= cell.l_mean > 0.0
    assert cell == er.empirical_cell(20, 60, 4, samples=3, restarts=2, root_seed=4)


@pytest.mark.slow
def test_bound_dominates_estimate_at_moderate_size():
    ratios = []
    for N in (200, 500, 1000):
        for rho in (0.05, 0.1, 0.2, 0.3):
            result = er.sharpness_ratio(100, N, round(rho * 100), restarts=100, root_seed=N, n_jobs=-1)
            ratios += [r for r in (result.ratio_U, result.ratio_L) if r is not None]
    assert sum(r >= 1.0 for r in ratios) >= 0.99 * len(ratios)
    assert max(ratios) < 2.0
