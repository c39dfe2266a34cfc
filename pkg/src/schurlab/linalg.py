"""Dense complex matrix foundation.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; :func:`as_matrix`
is the single validation gate. The SVD is a one-sided (Hestenes) Jacobi
iteration, which is slow compared to LAPACK but accurate for the small
matrices (n <= 64) this package targets, including the tiny singular values
that rank decisions depend on.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidInputError, NumericFailure

RANK_TOL = 1e-8
MAX_SWEEPS = 60
_EPS = np.finfo(float).eps


def as_matrix(m, *, square: bool = False) -> np.ndarray:
    """Return ``m`` as a finite, non-empty 2-D complex array (a copy)."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise InvalidInputError(f"matrix has a zero dimension: {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has NaN or infinite entries")
    if square and a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got {a.shape}")
    return a


class SvdResult(NamedTuple):
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray


def _jacobi(a: np.ndarray, want_vectors: bool):
    """Orthogonalize the columns of ``a`` (rows >= cols) in place.

    Returns the rotated matrix and the accumulated right rotation (or None).
    """
    n = a.shape[1]
    v = np.eye(n, dtype=complex) if want_vectors else None
    if n == 1:
        return a, v
    tol = _EPS * a.shape[0]
    # Pairs whose inner product is this small cannot move any singular value.
    floor = (_EPS * np.linalg.norm(a)) ** 2 * 1e-4
    for _ in range(MAX_SWEEPS):
        rotated = False
        norms = np.einsum("ij,ij->j", a.conj(), a).real
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha, beta = norms[i], norms[j]
                gamma = np.vdot(a[:, i], a[:, j])
                g = abs(gamma)
                if g <= floor or g <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                phase = gamma / g
                zeta = (beta - alpha) / (2.0 * g)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                ai = a[:, i].copy()
                bj = a[:, j] * np.conj(phase)
                a[:, i] = c * ai - s * bj
                a[:, j] = (s * ai + c * bj) * phase
                norms[i] = np.vdot(a[:, i], a[:, i]).real
                norms[j] = np.vdot(a[:, j], a[:, j]).real
                if v is not None:
                    vi = v[:, i].copy()
                    wj = v[:, j] * np.conj(phase)
                    v[:, i] = c * vi - s * wj
                    v[:, j] = (s * vi + c * wj) * phase
        if not rotated:
            return a, v
    off = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            off = max(off, abs(np.vdot(a[:, i], a[:, j])))
    raise NumericFailure(f"Jacobi SVD did not converge in {MAX_SWEEPS} sweeps", residual=off)


def _singular_values_tall(a: np.ndarray) -> np.ndarray:
    a, _ = _jacobi(a, want_vectors=False)
    return np.sort(np.linalg.norm(a, axis=0))[::-1]


def singular_values(m) -> np.ndarray:
    """Singular values of ``m`` in non-increasing order."""
    a = as_matrix(m)
    if a.shape[0] < a.shape[1]:
        a = a.conj().T.copy()
    return _singular_values_tall(a)


def svd(m) -> SvdResult:
    """Full SVD ``m = left @ diag(s) @ right^*`` by one-sided Jacobi.

    ``left`` is rows x rows, ``right`` is cols x cols, ``s`` has
    ``min(rows, cols)`` entries sorted non-increasing.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if rows < cols:
        u, s, v = svd(a.conj().T)
        return SvdResult(v, s, u)
    work, v = _jacobi(a.copy(), want_vectors=True)
    s = np.linalg.norm(work, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    work = work[:, order]
    v = v[:, order]
    # Columns with negligible norm carry no direction; rebuild them.
    cutoff = max(rows, cols) * _EPS * (s[0] if s[0] > 0 else 1.0)
    keep = int(np.count_nonzero(s > cutoff))
    q = work[:, :keep] / s[:keep]
    left = orthonormal_extend(list(q.T), rows, check=False)
    result = SvdResult(left, s, v)
    # Frobenius bounds the spectral residual from above.
    residual = np.linalg.norm(a - (left[:, :cols] * s) @ v.conj().T)
    if residual > 1e-10 * max(1.0, s[0]):
        raise NumericFailure("SVD reconstruction residual too large", residual=residual)
    return result


def operator_norm(m) -> float:
    """Spectral norm (largest singular value); 0 for the zero matrix."""
    return float(singular_values(m)[0])


def rank_with_tol(m, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol * max(1, sigma_max)``."""
    if tol < 0:
        raise InvalidInputError("tol must be non-negative")
    s = singular_values(m)
    return int(np.count_nonzero(s > tol * max(1.0, s[0])))


def null_space(m, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of ``m``."""
    a = as_matrix(m)
    res = svd(a)
    s = res.singular_values
    rank = int(np.count_nonzero(s > tol * max(1.0, s[0])))
    return res.right[:, rank:]


def range_basis(m, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical column space of ``m``."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise InvalidInputError("expected a 2-D array of column vectors")
    if a.shape[1] == 0:
        return a.copy()
    res = svd(a)
    s = res.singular_values
    rank = int(np.count_nonzero(s > tol * max(1.0, s[0])))
    if s[0] == 0:
        rank = 0
    return res.left[:, :rank]


def orthonormal_extend(vectors: Sequence, dim: int, *, check: bool = True) -> np.ndarray:
    """Complete orthonormal ``vectors`` to a ``dim x dim`` unitary.

    The inputs become the leading columns unchanged. Completion runs
    modified Gram-Schmidt over the canonical basis e_1, e_2, ... and skips
    candidates whose residual norm falls below 1e-6.
    """
    if dim < 1:
        raise InvalidInputError("dim must be positive")
    cols = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    if len(cols) > dim:
        raise InvalidInputError(f"{len(cols)} vectors cannot fit in dimension {dim}")
    for c in cols:
        if c.shape != (dim,):
            raise InvalidInputError(f"vector of length {c.shape[0]} in dimension {dim}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("vector has NaN or infinite entries")
    q = np.zeros((dim, dim), dtype=complex)
    k = len(cols)
    if k:
        q[:, :k] = np.column_stack(cols)
    if check and k:
        gram = q[:, :k].conj().T @ q[:, :k]
        if np.max(np.abs(gram - np.eye(k))) > 1e-10:
            raise InvalidInputError("input vectors are not orthonormal")
    for i in range(dim):
        if k == dim:
            break
        w = np.zeros(dim, dtype=complex)
        w[i] = 1.0
        for _ in range(2):  # reorthogonalize once
            for j in range(k):
                w -= np.vdot(q[:, j], w) * q[:, j]
        nrm = np.linalg.norm(w)
        if nrm < 1e-6:
            continue
        q[:, k] = w / nrm
        k += 1
    if k < dim:
        raise NumericFailure("orthonormal completion ran out of candidates")
    return q


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def ginibre(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def unitarity_defect(u) -> float:
    """Spectral norm of ``u^* u - I``."""
    u = np.asarray(u, dtype=complex)
    return operator_norm(u.conj().T @ u - np.eye(u.shape[1]))
