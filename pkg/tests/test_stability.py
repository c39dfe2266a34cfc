import math

import numpy as np
import pytest

from schurlab.errors import InvalidInputError, PairingFailure
from schurlab.jordan import jordan_matrix
from schurlab.linalg import operator_norm, random_unitary
from schurlab.schur import schur_decompose
from schurlab.stability import (backward_reconstruct, chain_head_spaces, corner_perturbation,
                                forward_demo, forward_demo_perturb, forward_gap_lower_bound,
                                ginibre_perturbation, holder_ratio, match_eigenvalues,
                                measure_backward, safety_threshold, shear_pair,
                                sqrt_splitting_pair)

from conftest import crandn


def test_match_square_root_pair():
    eps = 1e-6
    p = match_eigenvalues([0, 0], [math.sqrt(eps), -math.sqrt(eps)])
    assert p.cost == pytest.approx(math.sqrt(eps), rel=1e-15)
    assert sorted(p.perm) == [0, 1]


def test_match_identical_is_identity():
    p = match_eigenvalues([1, 2j, 3], [1, 2j, 3])
    assert p.perm == [0, 1, 2] and p.cost == 0.0


def test_match_small_example():
    p = match_eigenvalues([1, 2], [2.1, 1.05])
    assert p.perm == [1, 0]
    assert p.cost == pytest.approx(0.1)


def test_match_is_bottleneck_optimal(rng):
    from itertools import permutations
    for _ in range(20):
        a, b = crandn(rng, 5), crandn(rng, 5)
        best = min(max(abs(a[i] - b[p[i]]) for i in range(5)) for p in permutations(range(5)))
        assert match_eigenvalues(a, b).cost == pytest.approx(best, rel=1e-14)


@pytest.mark.parametrize("eps", [1e-2, 1e-4, 1e-6])
def test_holder_square_root_family(eps):
    r = holder_ratio(*sqrt_splitting_pair(eps))
    assert r.ratio_1n == pytest.approx(1, rel=1e-10)
    assert r.ratio_1 is None


def test_holder_shift():
    d = 1e-4
    a0 = np.diag([1.0, 2.0])
    r = holder_ratio(a0, a0 + d * np.eye(2))
    assert r.matched_dist == pytest.approx(d, rel=1e-9)
    assert r.ratio_1 == pytest.approx(1, rel=1e-9)


def test_holder_similarity_keeps_spectrum(rng):
    a0 = jordan_matrix([(0, 2)])
    q = random_unitary(2, rng)
    r = holder_ratio(a0, q @ a0 @ q.conj().T)
    assert r.matched_dist < 1e-7


def test_backward_identity_when_unperturbed(rng):
    a0 = crandn(rng, 4, 4)
    s = schur_decompose(a0)
    u0, t0 = backward_reconstruct(a0, s)
    np.testing.assert_allclose(u0, s.u, atol=1e-10)
    np.testing.assert_allclose(t0, s.t, atol=1e-10)


@pytest.mark.parametrize("eps", [1e-3, 1e-7])
def test_backward_shear(eps):
    a0, a = shear_pair(eps)
    s = schur_decompose(a)
    np.testing.assert_allclose(np.abs(s.u), [[0, 1], [1, 0]], atol=1e-15)
    u0, t0 = backward_reconstruct(a0, s)
    assert operator_norm(u0 - s.u) < 1e-15
    assert operator_norm(t0 - 2 * np.eye(2)) < 1e-15
    assert operator_norm(s.t - t0) == pytest.approx(eps, rel=1e-12)


def test_backward_residual_diag(rng):
    a0 = np.diag([1.0, 2.0])
    e = ginibre_perturbation(rng, 1e-6, a0)
    u0, t0 = backward_reconstruct(a0, schur_decompose(a0 + e))
    assert operator_norm(u0 @ t0 @ u0.conj().T - a0) <= 1e-8
    assert np.all(np.tril(t0, -1) == 0)


def test_chain_head_spaces():
    b = jordan_matrix([(0, 3), (0, 2), (0, 1)])
    dims = [q.shape[1] for q in chain_head_spaces(b)]
    assert dims == [3, 2, 1]


def test_backward_keeps_defective_pairing_bounded():
    a0 = jordan_matrix([(0, 2), (0, 1)])
    rep = measure_backward(a0, [1e-3, 1e-6, 1e-9], 8, seed=3)
    maxima = list(rep.decade_maxima().values())
    assert maxima[-1] <= 2 * maxima[0]
    assert not rep.violations()


def test_pairing_failure_reported():
    # A swap factor whose first column is orthogonal to the only eigenvector.
    a0 = jordan_matrix([(0, 2)])
    s = schur_decompose(jordan_matrix([(0, 2)]).T)
    with pytest.raises(PairingFailure):
        backward_reconstruct(a0, s)


def test_measure_backward_diag():
    rep = measure_backward(np.diag([1.0, 2.0, 3.0]), [1e-3, 1e-5], 10, seed=1)
    assert len(rep.records) == 20
    assert not rep.violations()
    assert all(math.isfinite(m) for m in rep.decade_maxima().values())


def test_measure_backward_shear_family():
    a0 = 2 * np.eye(2)
    rep = measure_backward(a0, [1e-3, 1e-6], 2, seed=0,
                           sampler=lambda rng, eps, a: shear_pair(eps)[1] - a0)
    for r in rep.records:
        assert r.u_dist == 0.0
        assert r.t_dist == pytest.approx(r.trial.epsilon, rel=1e-12)


def test_measure_backward_zero_trials():
    rep = measure_backward(np.eye(2), [1e-3], 0, seed=0)
    assert rep.records == [] and rep.decade_maxima() == {}
    assert rep.to_csv().splitlines() == ["matrix_id,seed,epsilon,norm_diff,u_dist,t_dist,ratio"]


def test_measure_backward_is_reproducible():
    a0 = jordan_matrix([(1, 2), (3, 1)])
    a = measure_backward(a0, [1e-3, 1e-4], 3, seed=11).to_csv()
    b = measure_backward(a0, [1e-3, 1e-4], 3, seed=11).to_csv()
    assert a == b
    assert measure_backward(a0, [1e-3, 1e-4], 3, seed=12).to_csv() != a


def test_measure_backward_rejects_bad_decades():
    with pytest.raises(InvalidInputError):
        measure_backward(np.eye(2), [1e-5, 1e-3], 1, seed=0)
    with pytest.raises(InvalidInputError):
        measure_backward(np.diag([0.0, 1e-3]), [1e-2], 1, seed=0)


def test_safety_threshold():
    assert safety_threshold(np.diag([0.0, 2.0])) == pytest.approx(1.0)
    assert math.isinf(safety_threshold(np.eye(3)))


def test_corner_sampler():
    e = corner_perturbation(None, 1e-4, np.zeros((3, 3)))
    assert e[2, 0] == 1e-4 and np.count_nonzero(e) == 1


def test_forward_perturb_bridge():
    j0 = jordan_matrix([(0, 2), (0, 1)])
    a = forward_demo_perturb(np.eye(3), j0, 2, 1e-3)
    np.testing.assert_allclose(a, [[0, 1, 0], [0, 0, 1e-3], [0, 0, 0]], atol=1e-18)
    assert np.linalg.norm(a @ np.eye(3)[:, 2]) > 0
    np.testing.assert_allclose(forward_demo_perturb(np.eye(3), j0, 2, 0.0), j0)


def test_forward_perturb_respects_epsilon(rng):
    p0 = random_unitary(3, rng) + 2 * np.eye(3)
    j0 = jordan_matrix([(1, 1), (1, 1), (3, 1)])
    a0 = p0 @ j0 @ np.linalg.inv(p0)
    for eps in (1e-2, 1e-6):
        a = forward_demo_perturb(p0, j0, 1, eps)
        assert 0 < operator_norm(a - a0) <= eps * (1 + 1e-12)


def test_forward_perturb_rejects_bad_index():
    with pytest.raises(InvalidInputError):
        forward_demo_perturb(np.eye(2), jordan_matrix([(0, 2)]), 1, 1e-3)
    with pytest.raises(InvalidInputError):
        forward_demo_perturb(np.eye(2), np.diag([0.0, 1.0]), 1, 1e-3)


@pytest.mark.parametrize("eps", [1e-2, 1e-5, 1e-8])
def test_forward_bound_shear(eps):
    a0, a = shear_pair(eps)
    bound = forward_gap_lower_bound(a0, np.eye(2), a0, a, phase_samples=64)
    assert bound >= 1
    assert bound == pytest.approx(math.sqrt(2), abs=1e-8)


def test_forward_bound_zero_for_own_factorization(rng):
    a = crandn(rng, 3, 3)
    s = schur_decompose(a)
    assert forward_gap_lower_bound(a, s.u, s.t, a) == pytest.approx(0, abs=1e-7)


def test_forward_bound_rejects_foreign_factorization():
    with pytest.raises(InvalidInputError):
        forward_gap_lower_bound(np.eye(2), np.eye(2), 2 * np.eye(2), np.eye(2))


def test_forward_demo_rows():
    rows = forward_demo(np.eye(3), jordan_matrix([(0, 2), (0, 1)]), [1e-2, 1e-6])
    for r in rows:
        assert r["lower_bound"] == pytest.approx(math.sqrt(2), abs=1e-8)
        assert r["gk_differs"]
        assert r["norm_diff"] == pytest.approx(r["epsilon"], rel=1e-12)


def test_backward_square_root_family_bounded():
    a0, _ = sqrt_splitting_pair(0.0)
    rep = measure_backward(a0, [1e-3, 1e-6, 1e-9], 10, seed=5)
    maxima = list(rep.decade_maxima().values())
    assert maxima[-1] <= 2 * maxima[0]
    assert not rep.violations() and not rep.failures


def test_backward_repeated_plus_simple_bounded():
    a0 = np.diag([2.0, 2.0, 3.0])
    rep = measure_backward(a0, [1e-3, 1e-6, 1e-9], 10, seed=8)
    maxima = list(rep.decade_maxima().values())
    assert maxima[-1] <= 2 * maxima[0]
    assert not rep.violations() and not rep.failures
