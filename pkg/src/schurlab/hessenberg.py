"""Lower unitary Hessenberg matrices and their Schur parameters.

A lower unitary Hessenberg matrix H (zeros above the first superdiagonal,
positive superdiagonal) is generated by parameters rho_1..rho_n with
|rho_j| <= 1 for j < n and |rho_n| = 1:

    H[0, 0]   = -rho_1
    H[j, j+1] = mu_j,                     mu_j = sqrt(1 - |rho_j|^2)
    H[i, j]   = -rho_i * mu_{i-1} ... mu_j * conj(rho_{j-1})   (i >= j)

with the conj(rho_0) factor dropped in the first column. The first column
alone fixes every parameter whenever all mu_j > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix

UNIT_TOL = 1e-10
_DEGENERATE = 1e-14


@dataclass(frozen=True)
class SchurParams:
    """Schur parameters ``rho`` of an n x n lower unitary Hessenberg matrix.

    ``mu`` may be supplied when it is known more accurately than
    ``sqrt(1 - |rho|^2)`` (e.g. as a ratio of tail norms).
    """

    rho: np.ndarray
    mu: np.ndarray = field(default=None)

    def __post_init__(self):
        rho = np.atleast_1d(np.asarray(self.rho, dtype=complex))
        if rho.ndim != 1 or rho.size == 0:
            raise InvalidInputError("rho must be a non-empty vector")
        mod = np.abs(rho)
        if np.any(mod[:-1] > 1.0 + UNIT_TOL):
            raise InvalidInputError("|rho_j| must not exceed 1 for j < n")
        if abs(mod[-1] - 1.0) > UNIT_TOL:
            raise InvalidInputError(
                f"|rho_n| must be 1 for a unitary matrix, got {mod[-1]!r}")
        if self.mu is None:
            mu = np.sqrt(np.clip(1.0 - mod[:-1] ** 2, 0.0, None))
        else:
            mu = np.asarray(self.mu, dtype=float).reshape(-1)
            if mu.shape != (rho.size - 1,):
                raise InvalidInputError("mu must have n - 1 entries")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "mu", mu)

    @property
    def n(self) -> int:
        return self.rho.size


def hessenberg_from_params(p: SchurParams) -> np.ndarray:
    """Assemble the lower unitary Hessenberg matrix generated by ``p``."""
    n = p.n
    rho, mu = p.rho, p.mu
    h = np.zeros((n, n), dtype=complex)
    for j in range(n):
        left = 1.0 if j == 0 else np.conj(rho[j - 1])
        prod = 1.0
        for i in range(j, n):
            if i > j:
                prod *= mu[i - 1]
                if prod == 0.0:
                    break
            h[i, j] = -rho[i] * prod * left
        if j < n - 1:
            h[j, j + 1] = mu[j]
    return h


def params_from_first_column(x) -> SchurParams:
    """Recover Schur parameters from a unit first column.

    Solves x_1 = -rho_1, x_j = -rho_j mu_{j-1}...mu_1 front to back. The
    product mu_{j-1}...mu_1 equals the norm of the tail x_j..x_n, which is
    what is used. Once the tail vanishes the remaining parameters are
    underdetermined; they are set to rho_{j} = -rho_{j-1}, which makes the
    trailing block the identity.
    """
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise InvalidInputError("first column must be a finite non-empty vector")
    if abs(np.linalg.norm(x) - 1.0) > UNIT_TOL:
        raise InvalidInputError(f"first column must have unit norm, got {np.linalg.norm(x)!r}")
    n = x.size
    tail = np.sqrt(np.cumsum((np.abs(x) ** 2)[::-1])[::-1])
    tail[0] = 1.0
    rho = np.empty(n, dtype=complex)
    mu = np.zeros(n - 1)
    for j in range(n):
        if j > 0 and mu[j - 1] == 0.0:
            rho[j] = -rho[j - 1]
            continue
        rho[j] = -x[j] / tail[j]
        if j < n - 1:
            ratio = tail[j + 1] / tail[j]
            if ratio <= _DEGENERATE:
                rho[j] /= abs(rho[j])
                ratio = 0.0
            mu[j] = ratio
    return SchurParams(rho, mu)


def hessenberg_from_first_column(x) -> np.ndarray:
    """Lower unitary Hessenberg matrix whose first column is ``x``."""
    return hessenberg_from_params(params_from_first_column(x))


def embed(h: np.ndarray, n: int) -> np.ndarray:
    """Return ``I_{n-m} (+) h`` for an m x m block ``h``."""
    m = h.shape[0]
    out = np.eye(n, dtype=complex)
    out[n - m:, n - m:] = h
    return out


@dataclass(frozen=True)
class HessenbergChain:
    """Factors ``I_{k-1} (+) H_k`` whose product is a unitary matrix.

    Only the trailing blocks ``H_k`` are stored; ``factors`` embeds them.
    """

    n: int
    blocks: tuple

    @property
    def factors(self) -> list[np.ndarray]:
        return [embed(b, self.n) for b in self.blocks]

    def product(self) -> np.ndarray:
        u = np.eye(self.n, dtype=complex)
        for k, b in enumerate(self.blocks):
            u[:, k:] = u[:, k:] @ b
        return u

    def __len__(self):
        return len(self.blocks)


def factor_unitary(u) -> HessenbergChain:
    """Write a unitary ``u`` as a product of embedded Hessenberg factors.

    Step k peels the first column of the deflated unitary U_k with the
    Hessenberg matrix built on it. The unimodular scalar left after n - 1
    steps is folded into the last column of the last factor, which keeps that
    factor lower Hessenberg.
    """
    u = as_matrix(u, square=True)
    n = u.shape[0]
    if np.max(np.abs(u.conj().T @ u - np.eye(n))) > 1e-8:
        raise InvalidInputError("matrix is not unitary")
    if n == 1:
        return HessenbergChain(1, (u.copy(),))
    blocks = []
    w = u
    for k in range(n - 1):
        x = w[:, 0] / np.linalg.norm(w[:, 0])
        h = hessenberg_from_first_column(x)
        rest = h.conj().T @ w
        if k == n - 2:
            phase = rest[1, 1] / abs(rest[1, 1])
            h = h.copy()
            h[:, 1] *= phase
        blocks.append(h)
        w = rest[1:, 1:]
    return HessenbergChain(n, tuple(blocks))


def is_lower_hessenberg(h, tol: float = 0.0) -> bool:
    h = np.asarray(h)
    return bool(np.all(np.abs(np.triu(h, 2)) <= tol))
