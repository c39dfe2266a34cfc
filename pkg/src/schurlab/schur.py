"""Eigenpairs and the Hessenberg-deflation Schur decomposition.

Eigenvalues come from a Householder reduction to upper Hessenberg form
followed by Wilkinson-shifted complex QR; eigenvectors from inverse
iteration. The Schur form is then built one eigenvector at a time: the
eigenvector of the active trailing block becomes the first column of a
lower unitary Hessenberg factor, conjugating by that factor fixes one
diagonal entry, and the block shrinks by one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InvalidInputError, NumericFailure
from .hessenberg import HessenbergChain, hessenberg_from_first_column
from .linalg import as_matrix, operator_norm, svd

log = logging.getLogger(__name__)

MAX_N = 64
EIG_TOL = 1e-9
POLISH_MAX_N = 24
_EPS = np.finfo(float).eps

OrderPolicy = Union[str, Sequence[complex]]


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray
    residual: float


@dataclass(frozen=True)
class SchurForm:
    u: np.ndarray
    t: np.ndarray
    chain: HessenbergChain
    residual: float

    @property
    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.t).copy()


def _check_size(a):
    if a.shape[0] > MAX_N:
        raise InvalidInputError(f"n = {a.shape[0]} exceeds the supported maximum {MAX_N}")


def _house(x):
    """Householder vector v (unit) with (I - 2vv^*) x = alpha e_1."""
    v = x.astype(complex).copy()
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        return None
    phase = v[0] / abs(v[0]) if v[0] != 0 else 1.0
    v[0] += phase * nrm
    vn = np.linalg.norm(v)
    if vn == 0.0:
        return None
    return v / vn


def upper_hessenberg(a) -> np.ndarray:
    """Unitarily similar upper Hessenberg matrix (Householder reduction)."""
    h = as_matrix(a, square=True)
    n = h.shape[0]
    for k in range(n - 2):
        v = _house(h[k + 1:, k])
        if v is None:
            continue
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _eig2(a, b, c, d):
    """Eigenvalues of [[a, b], [c, d]], the one nearer d second."""
    half = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    big = half + disc if abs(half + disc) >= abs(half - disc) else half - disc
    det = a * d - b * c
    small = det / big if big != 0 else 0.0 * half
    if abs(small - d) <= abs(big - d):
        return big, small
    return small, big


def _givens(x, y):
    """c, s with [[c, s], [-conj(s), c]] @ [x, y] = [r, 0]."""
    ax, ay = abs(x), abs(y)
    if ay == 0.0:
        return 1.0, 0.0
    r = np.hypot(ax, ay)
    if ax == 0.0:
        return 0.0, np.conj(y) / ay
    return ax / r, (x / ax) * np.conj(y) / r


def eigenvalues(a, max_iter_per_value: int = 30) -> np.ndarray:
    """All eigenvalues of ``a`` (with multiplicity), unsorted."""
    h = upper_hessenberg(a)
    _check_size(h)
    n = h.shape[0]
    vals = np.empty(n, dtype=complex)
    # Norm-wise floor: a subdiagonal below eps * ||H|| can be dropped at the
    # cost of a backward error of that size. Without it, clusters from
    # defective eigenvalues converge only linearly.
    floor = _EPS * np.linalg.norm(h)
    budget = max_iter_per_value * n
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        if hi == 0:
            vals[0] = h[0, 0]
            break
        lo = hi
        while lo > 0:
            scale = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if scale == 0.0:
                scale = np.abs(h).max()
            if abs(h[lo, lo - 1]) <= max(_EPS * scale, floor):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            vals[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            e1, e2 = _eig2(h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi])
            vals[lo], vals[hi] = e1, e2
            hi -= 2
            its = 0
            continue
        its += 1
        total += 1
        if total > budget:
            raise NumericFailure("QR iteration did not converge",
                                 residual=abs(h[hi, hi - 1]), partial=vals[hi + 1:].copy())
        if its % 11 == 0:
            shift = h[hi, hi] + abs(h[hi, hi - 1]) + abs(h[hi - 1, hi - 2])
        else:
            shift = _eig2(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])[1]
        blk = slice(lo, hi + 1)
        m = hi - lo + 1
        sub = h[blk, blk] - shift * np.eye(m)
        rots = []
        for k in range(m - 1):
            c, s = _givens(sub[k, k], sub[k + 1, k])
            g = np.array([[c, s], [-np.conj(s), c]])
            sub[k:k + 2, k:] = g @ sub[k:k + 2, k:]
            sub[k + 1, k] = 0.0
            rots.append(g)
        for k, g in enumerate(rots):
            top = min(k + 2, m - 1)
            sub[:top + 1, k:k + 2] = sub[:top + 1, k:k + 2] @ g.conj().T
        h[blk, blk] = sub + shift * np.eye(m)
    return vals


def order_key(scale: float):
    def key(z):
        return (-round(abs(z) / scale, 10), z.real, z.imag)
    return key


def sort_eigenvalues(vals) -> np.ndarray:
    """Descending modulus, ties broken by (real, imag)."""
    vals = np.asarray(vals, dtype=complex)
    scale = max(1.0, float(np.abs(vals).max())) if vals.size else 1.0
    return np.array(sorted(vals, key=order_key(scale)), dtype=complex)


def _normalize_phase(x):
    x = x / np.linalg.norm(x)
    mod = np.abs(x)
    idx = int(np.argmax(mod >= 0.5 * mod.max()))
    return x * (abs(x[idx]) / x[idx])


def inverse_iteration(a, value, start=None, avoid=None, iters: int = 6):
    """Unit eigenvector of ``a`` for the eigenvalue nearest ``value``.

    ``avoid`` holds orthonormal columns to project out of every iterate (used
    to pull further independent vectors out of a repeated eigenvalue).
    Returns ``(vector, residual)``.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    scale = max(1.0, np.abs(a).max())
    if start is None:
        start = np.ones(n, dtype=complex) + 1j * np.arange(n) / (n + 1.0)
    x = start / np.linalg.norm(start)
    shift = value + 10 * _EPS * scale * (1 + 1j)
    m = a - shift * np.eye(n)
    best, best_res = None, np.inf
    for _ in range(iters):
        if avoid is not None and avoid.shape[1]:
            x = x - avoid @ (avoid.conj().T @ x)
            if np.linalg.norm(x) == 0.0:
                break
            x = x / np.linalg.norm(x)
        try:
            y = np.linalg.solve(m, x)
        except np.linalg.LinAlgError:
            m = m - 1e3 * _EPS * scale * np.eye(n)
            y = np.linalg.solve(m, x)
        if avoid is not None and avoid.shape[1]:
            y = y - avoid @ (avoid.conj().T @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0 or not np.isfinite(ny):
            break
        x = y / ny
        res = np.linalg.norm(a @ x - value * x)
        if res < best_res:
            best, best_res = x, res
    if best is None:
        raise NumericFailure("inverse iteration broke down")
    if n <= POLISH_MAX_N and (avoid is None or not avoid.shape[1]):
        # Smallest right singular vector of (a - value I) minimizes the
        # residual outright; it settles directions that inverse iteration
        # leaves drifting near defective eigenvalues.
        res_svd = svd(a - value * np.eye(n))
        cand = res_svd.right[:, -1]
        cand_res = np.linalg.norm(a @ cand - value * cand)
        if cand_res <= best_res:
            best, best_res = cand, cand_res
    return _normalize_phase(best), float(best_res)


def eigenpairs(a, tol: float | None = None) -> list[EigenPair]:
    """Eigenvalues with unit eigenvectors, descending modulus.

    Repeated eigenvalues get independent vectors while the eigenspace has
    room; for a defective eigenvalue the surplus entries repeat the one
    available direction.
    """
    a = as_matrix(a, square=True)
    _check_size(a)
    norm_a = operator_norm(a)
    if tol is None:
        tol = EIG_TOL * max(1.0, norm_a)
    vals = sort_eigenvalues(eigenvalues(a))
    pairs: list[EigenPair] = []
    cluster_tol = 1e-6 * max(1.0, norm_a)
    for val in vals:
        same = [p.vector for p in pairs if abs(p.value - val) <= cluster_tol]
        avoid = np.column_stack(same) if same else None
        if avoid is not None:
            avoid, _ = np.linalg.qr(avoid)
        vec, res = inverse_iteration(a, val, avoid=avoid)
        if avoid is not None and res > tol:
            # No room left in the eigenspace: reuse the known direction.
            vec, res = inverse_iteration(a, val)
        if res > tol:
            log.warning("eigenpair residual %.3g exceeds tolerance %.3g", res, tol)
        pairs.append(EigenPair(complex(val), vec, res))
    return pairs


def _targets(a, policy: OrderPolicy) -> np.ndarray:
    vals = eigenvalues(a)
    if isinstance(policy, str):
        if policy in ("descending", "first-diagonal"):
            return sort_eigenvalues(vals)
        raise InvalidInputError(f"unknown eigenvalue order policy {policy!r}")
    target = np.asarray(policy, dtype=complex).reshape(-1)
    if target.size != vals.size:
        raise InvalidInputError("match-target policy needs one target per eigenvalue")
    from .stability import match_eigenvalues
    perm = match_eigenvalues(target, vals).perm
    return vals[perm]


def schur_decompose(a, eigenvalue_order: OrderPolicy = "descending",
                    leading_vector=None) -> SchurForm:
    """Schur decomposition ``a = u t u^*`` by Hessenberg deflation.

    ``eigenvalue_order`` is ``"descending"`` (modulus), ``"first-diagonal"``
    (keep e_1 whenever it already is an eigenvector of the active block), or
    a sequence of target eigenvalues to follow as closely as possible.
    ``leading_vector`` forces the first column of ``u`` (it must be a unit
    eigenvector of ``a``).
    """
    a = as_matrix(a, square=True)
    _check_size(a)
    n = a.shape[0]
    scale = max(1.0, operator_norm(a))
    tol = EIG_TOL * scale
    remaining = list(_targets(a, eigenvalue_order))
    work = a.copy()
    u = np.eye(n, dtype=complex)
    blocks = []
    for k in range(n - 1):
        blk = work[k:, k:]
        x = None
        if k == 0 and leading_vector is not None:
            x = np.asarray(leading_vector, dtype=complex).reshape(-1)
            x = x / np.linalg.norm(x)
            lam = np.vdot(x, a @ x)
            if np.linalg.norm(a @ x - lam * x) > tol:
                raise InvalidInputError("leading_vector is not an eigenvector")
        elif eigenvalue_order == "first-diagonal":
            lam = blk[0, 0]
            if np.linalg.norm(blk[1:, 0]) <= tol:
                x = np.zeros(n - k, dtype=complex)
                x[0] = 1.0
        if x is None:
            lam = remaining[0]
            x, _ = inverse_iteration(blk, lam)
        idx = int(np.argmin([abs(r - lam) for r in remaining]))
        remaining.pop(idx)
        h = hessenberg_from_first_column(x)
        work[k:, :] = h.conj().T @ work[k:, :]
        work[:, k:] = work[:, k:] @ h
        work[k + 1:, k] = 0.0
        u[:, k:] = u[:, k:] @ h
        blocks.append(h)
    t = np.triu(work)
    residual = operator_norm(u @ t @ u.conj().T - a)
    chain = HessenbergChain(n, tuple(blocks))
    return SchurForm(u, t, chain, residual)


def verify_schur(a, s: SchurForm) -> float:
    """Worst of reconstruction error, unitarity defect and sub-diagonal mass."""
    a = as_matrix(a, square=True)
    if s.u.shape != a.shape or s.t.shape != a.shape:
        raise InvalidInputError("factor shapes do not match the matrix")
    n = a.shape[0]
    recon = operator_norm(s.u @ s.t @ s.u.conj().T - a)
    unit = operator_norm(s.u.conj().T @ s.u - np.eye(n))
    lower = float(np.abs(np.tril(s.t, -1)).max()) if n > 1 else 0.0
    return max(recon, unit, lower)
