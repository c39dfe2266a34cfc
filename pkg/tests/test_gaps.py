import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schurlab.errors import InvalidInputError
from schurlab.gaps import (Subspace, gap, intersection_dim, kernel, kernel_semigap_ratio,
                           orthocomplement, projector, semigap)

from conftest import crandn

S = 1 / math.sqrt(2)


def random_subspace(rng, n, k):
    return Subspace.span(crandn(rng, n, k)) if k else Subspace.zero(n)


@pytest.mark.parametrize("vectors, expected", [
    ([1, 0], [[1, 0], [0, 0]]),
    ([S, S], [[0.5, 0.5], [0.5, 0.5]]),
    (np.eye(3), np.eye(3)),
])
def test_projector(vectors, expected):
    s = Subspace.span(np.array(vectors, dtype=complex))
    p = projector(s)
    np.testing.assert_allclose(p.matrix, expected, atol=1e-15)
    assert max(p.defects(s).values()) < 1e-14


def test_gap_examples():
    e = np.eye(3)
    m = Subspace.span(e[:, :2])
    assert gap(m, m) == 0.0
    assert gap(Subspace.span(e[:, 0]), m) == 1.0
    a = math.pi / 4
    got = gap(Subspace.span([1, 0]), Subspace.span([math.cos(a), math.sin(a)]))
    assert got == pytest.approx(math.sin(a), abs=1e-15)


def test_semigap_examples():
    e = np.eye(3)
    assert semigap(Subspace.span(e[:, 0]), Subspace.span(e[:, :2])) == pytest.approx(0, abs=1e-15)
    assert semigap(Subspace.span(e[:, :2]), Subspace.span(e[:, 0])) == pytest.approx(1, abs=1e-15)
    a = math.pi / 6
    got = semigap(Subspace.span([math.cos(a), math.sin(a)]), Subspace.span([1, 0]))
    assert got == pytest.approx(0.5, abs=1e-15)


def test_zero_subspace_conventions():
    z, f = Subspace.zero(3), Subspace.full(3)
    assert semigap(z, f) == 0.0
    assert semigap(f, z) == 1.0
    assert gap(z, z) == 0.0
    assert gap(z, f) == 1.0


@pytest.mark.parametrize("vectors, expected", [
    ([1, 0], [0, 1]),
    ([S, S], [S, -S]),
])
def test_orthocomplement(vectors, expected):
    c = orthocomplement(Subspace.span(np.array(vectors, dtype=complex)))
    assert c.dim == 1
    assert abs(abs(np.vdot(c.basis[:, 0], expected)) - 1) < 1e-14


def test_orthocomplement_of_zero_is_full():
    c = orthocomplement(Subspace.zero(3))
    assert c.dim == 3


def test_intersection_dim(rng):
    shared = crandn(rng, 6, 2)
    m = Subspace.span(np.hstack([shared, crandn(rng, 6, 1)]))
    n = Subspace.span(np.hstack([shared, crandn(rng, 6, 2)]))
    assert intersection_dim(m, n) == 2


def test_subspace_rejects_non_orthonormal():
    with pytest.raises(InvalidInputError):
        Subspace(np.array([[1.0], [1.0]]))


def test_ambient_mismatch():
    with pytest.raises(InvalidInputError):
        gap(Subspace.full(2), Subspace.full(3))


def test_kernel_ratio_examples():
    a0 = np.diag([0.0, 1.0])
    assert kernel_semigap_ratio(a0, a0).ratio == 0.0
    d = 1e-3
    r = kernel_semigap_ratio(a0, [[0, 0], [d, 1]])
    assert r.semigap == pytest.approx(d / math.sqrt(1 + d * d), rel=1e-10)
    assert r.ratio == pytest.approx(1, abs=1e-5)
    r = kernel_semigap_ratio(a0, np.diag([d, 1.0]))
    assert r.semigap == 0.0 and r.ratio == 0.0


def test_kernel_of_rank_deficient(rng):
    a = crandn(rng, 5, 2) @ crandn(rng, 2, 5)
    k = kernel(a)
    assert k.dim == 3
    assert np.linalg.norm(a @ k.basis) < 1e-10


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(0, 5), l=st.integers(0, 5))
def test_gap_is_max_of_semigaps_and_bounded(seed, k, l):
    r = np.random.default_rng(seed)
    m, n = random_subspace(r, 5, k), random_subspace(r, 5, l)
    g = gap(m, n)
    assert 0 <= g <= 1
    assert g == pytest.approx(max(semigap(m, n), semigap(n, m)), abs=1e-10)
    assert g == pytest.approx(gap(n, m), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_gap_triangle_inequality(seed):
    r = np.random.default_rng(seed)
    a, b, c = (random_subspace(r, 4, 2) for _ in range(3))
    assert gap(a, c) <= gap(a, b) + gap(b, c) + 1e-12
