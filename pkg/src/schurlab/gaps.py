"""Subspaces of C^n, orthogonal projectors, gap and semigap.

gap(M, N)     = ||P_M - P_N||
semigap(M, N) = sup over unit x in M of ||x - P_N x||
              = ||(I - P_N) B_M||   for an orthonormal basis B_M of M.

The semigap from the zero subspace is 0 (empty supremum).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError
from .linalg import (RANK_TOL, as_matrix, null_space, operator_norm, orthonormal_extend,
                     range_basis, rank_with_tol)

BASIS_TOL = 1e-10


@dataclass(frozen=True)
class Subspace:
    """Subspace given by orthonormal basis columns (``n x k``, k may be 0)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] == 0:
            raise InvalidInputError("basis must be an n x k array with n >= 1")
        if not np.all(np.isfinite(b)):
            raise InvalidInputError("basis has NaN or infinite entries")
        k = b.shape[1]
        if k > b.shape[0]:
            raise InvalidInputError("more basis vectors than the ambient dimension")
        if k and np.max(np.abs(b.conj().T @ b - np.eye(k))) > BASIS_TOL:
            raise InvalidInputError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, vectors, tol: float = RANK_TOL) -> "Subspace":
        """Span of the columns of ``vectors`` (need not be independent)."""
        v = np.asarray(vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        return cls(range_basis(v, tol))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n, dtype=complex))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class Projector:
    matrix: np.ndarray

    def defects(self, s: Subspace) -> dict:
        """Idempotency, self-adjointness and range errors (spectral norm)."""
        p = self.matrix
        out = {
            "idempotent": operator_norm(p @ p - p),
            "self_adjoint": operator_norm(p.conj().T - p),
            "range": 0.0,
        }
        if s.dim:
            out["range"] = operator_norm(p @ s.basis - s.basis)
        return out


def projector(s: Subspace) -> Projector:
    return Projector(s.basis @ s.basis.conj().T)


def _same_ambient(m: Subspace, n: Subspace):
    if m.ambient_dim != n.ambient_dim:
        raise InvalidInputError(
            f"ambient dimensions differ: {m.ambient_dim} vs {n.ambient_dim}")


def gap(m: Subspace, n: Subspace) -> float:
    _same_ambient(m, n)
    if m.dim == 0 and n.dim == 0:
        return 0.0
    diff = projector(m).matrix - projector(n).matrix
    return min(operator_norm(diff), 1.0)


def semigap(m: Subspace, n: Subspace) -> float:
    _same_ambient(m, n)
    if m.dim == 0:
        return 0.0
    residual = m.basis - projector(n).matrix @ m.basis
    return min(operator_norm(residual), 1.0)


def orthocomplement(s: Subspace) -> Subspace:
    q = orthonormal_extend(list(s.basis.T), s.ambient_dim, check=False)
    return Subspace(q[:, s.dim:])


def intersection_dim(m: Subspace, n: Subspace, tol: float = RANK_TOL) -> int:
    """dim(M cap N) = dim M + dim N - rank([B_M, B_N])."""
    _same_ambient(m, n)
    if m.dim == 0 or n.dim == 0:
        return 0
    return m.dim + n.dim - rank_with_tol(np.hstack([m.basis, n.basis]), tol)


def kernel(a, tol: float = RANK_TOL) -> Subspace:
    return Subspace(null_space(as_matrix(a), tol))


class KernelRatio(NamedTuple):
    semigap: float
    norm_diff: float
    ratio: float


def kernel_semigap_ratio(a0, a, rank_tol: float = RANK_TOL) -> KernelRatio:
    """semigap(ker A, ker A0), ||A - A0|| and their ratio.

    The ratio is 0 when ker A is trivial or A equals A0.
    """
    a0 = as_matrix(a0, square=True)
    a = as_matrix(a, square=True)
    if a0.shape != a.shape:
        raise InvalidInputError("matrices must have equal dimensions")
    ker_a = kernel(a, rank_tol)
    theta = semigap(ker_a, kernel(a0, rank_tol))
    diff = operator_norm(a - a0)
    ratio = theta / diff if (ker_a.dim and diff > 0) else 0.0
    return KernelRatio(theta, diff, ratio)
