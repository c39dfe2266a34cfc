"""Jordan structure from rank sequences and Gohberg-Kaashoek numbers.

Block sizes are read off the Weyr characteristic: with
d_k = n - rank((A - lambda I)^k), the increment d_k - d_{k-1} counts the
Jordan blocks of size >= k. All size sequences are kept non-increasing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, RankAmbiguityWarning
from .linalg import RANK_TOL, as_matrix, null_space, singular_values
from .schur import eigenvalues, order_key

CLUSTER_TOL = 1e-6


def _nullities(a, lam, tol, limit=None):
    n = a.shape[0]
    b = a - lam * np.eye(n)
    p = np.eye(n, dtype=complex)
    d = []
    uncertain = False
    limit = n if limit is None else limit
    for _ in range(n):
        p = p @ b
        s = singular_values(p)
        thresh = tol * max(1.0, s[0])
        near = s[(s > thresh / 10) & (s <= thresh * 10)]
        uncertain |= bool(near.size)
        dk = n - int(np.count_nonzero(s > thresh))
        if d and dk == d[-1]:
            break
        d.append(dk)
        if dk >= limit:
            break
    return d, uncertain


def weyr_nullities(a, lam, tol: float = RANK_TOL) -> list[int]:
    """Nullities d_k of (A - lam I)^k for k = 1.. until they stop growing.

    Emits :class:`RankAmbiguityWarning` when some singular value lies within
    a factor 10 of the rank threshold.
    """
    a = as_matrix(a, square=True)
    d, uncertain = _nullities(a, complex(lam), tol)
    if uncertain:
        warnings.warn(f"rank decision near threshold at lambda={lam}", RankAmbiguityWarning,
                      stacklevel=2)
    return d


def block_sizes_from_nullities(d) -> list[int]:
    """Jordan block sizes (non-increasing) consistent with nullities ``d``."""
    d = [int(x) for x in d]
    counts = []
    prev = 0
    for x in d:
        counts.append(x - prev)
        prev = x
    if any(c < 0 for c in counts):
        raise InvalidInputError(f"nullities must be non-decreasing: {d}")
    if any(counts[i] < counts[i + 1] for i in range(len(counts) - 1)):
        raise InvalidInputError(f"nullity increments must be non-increasing: {d}")
    counts.append(0)
    sizes = []
    for k in range(len(counts) - 1, 0, -1):
        sizes.extend([k] * (counts[k - 1] - counts[k]))
    return sizes


def dual_sequence(m) -> list[int]:
    """k_i = max{l : m_l >= i} (1-based, 0 if empty), padded to len(m)."""
    m = [int(x) for x in m]
    n = len(m)
    if any(m[i] < m[i + 1] for i in range(n - 1)):
        raise InvalidInputError(f"sequence must be non-increasing: {m}")
    if any(x < 0 or x > n for x in m):
        raise InvalidInputError(f"entries must lie in [0, {n}]: {m}")
    return [sum(1 for x in m if x >= i) for i in range(1, n + 1)]


@dataclass(frozen=True)
class GkProfile:
    eigenvalues: tuple
    block_sizes: tuple
    aggregate_m: tuple
    dual_k: tuple
    uncertain: bool = field(default=False, compare=False)

    def as_dict(self) -> dict:
        """Map each cluster representative to its block sizes."""
        return dict(zip(self.eigenvalues, self.block_sizes))

    def same_structure(self, other: "GkProfile") -> bool:
        """Integer comparison of the GK data, ignoring eigenvalue locations."""
        return (sorted(self.block_sizes) == sorted(other.block_sizes)
                and self.aggregate_m == other.aggregate_m)


def aggregate(block_sizes, n: int) -> list[int]:
    m = [0] * n
    for sizes in block_sizes:
        for i, s in enumerate(sizes):
            m[i] += s
    return m


def cluster_eigenvalues(vals, tol: float) -> list[list[complex]]:
    """Single-linkage clusters of ``vals`` at radius ``tol``."""
    vals = list(np.asarray(vals, dtype=complex))
    parent = list(range(len(vals)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list] = {}
    for i, v in enumerate(vals):
        groups.setdefault(find(i), []).append(v)
    return list(groups.values())


def cluster_representatives(vals, tol: float = CLUSTER_TOL):
    """Sorted ``(mean, multiplicity)`` per eigenvalue cluster."""
    clusters = cluster_eigenvalues(vals, tol)
    reps = [(complex(np.mean(c)), len(c)) for c in clusters]
    scale = max([1.0] + [abs(r) for r, _ in reps])
    key = order_key(scale)
    return sorted(reps, key=lambda rm: key(rm[0]))


def gk_profile(a, cluster_tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL) -> GkProfile:
    """Per-eigenvalue Jordan block sizes, GK numbers and their dual."""
    a = as_matrix(a, square=True)
    n = a.shape[0]
    reps = cluster_representatives(eigenvalues(a), cluster_tol)
    uncertain = False
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if abs(reps[i][0] - reps[j][0]) <= 2 * cluster_tol:
                uncertain = True
    blocks = []
    for lam, mult in reps:
        d, unc = _nullities(a, lam, rank_tol, limit=mult)
        uncertain |= unc
        try:
            sizes = block_sizes_from_nullities(d)
        except InvalidInputError:
            uncertain = True
            sizes = [1] * mult
        if sum(sizes) != mult:
            uncertain = True
        blocks.append(tuple(sizes))
    if uncertain:
        warnings.warn("Jordan structure is tolerance-sensitive for this matrix",
                      RankAmbiguityWarning, stacklevel=2)
    m = aggregate(blocks, n)
    m = sorted(m, reverse=True)
    return GkProfile(tuple(r for r, _ in reps), tuple(blocks), tuple(m),
                     tuple(dual_sequence(m)), uncertain)


def predict_deflation(block_sizes, t: int, l: int) -> list[tuple]:
    """Block sizes after deflating the eigenvector of chain ``l`` of eigenvalue ``t``.

    Indices are 1-based, matching the numbering m_1 >= m_2 >= ... of the
    chains. Chains of other eigenvalues are untouched. Within eigenvalue
    ``t`` the run of chains tied with chain ``l`` shifts up and its last
    member loses one vector; chains of zero length disappear.
    """
    sizes = [list(int(x) for x in s) for s in block_sizes]
    if not 1 <= t <= len(sizes):
        raise InvalidInputError(f"eigenvalue index {t} out of range")
    target = sizes[t - 1]
    if any(target[i] < target[i + 1] for i in range(len(target) - 1)):
        raise InvalidInputError("block sizes must be non-increasing")
    if not 1 <= l <= len(target):
        raise InvalidInputError(f"chain index {l} out of range for sizes {target}")
    value = target[l - 1]
    last = l - 1
    while last + 1 < len(target) and target[last + 1] == value:
        last += 1
    target[last] -= 1
    sizes[t - 1] = [x for x in target if x > 0]
    return [tuple(s) for s in sizes]


@dataclass(frozen=True)
class JordanBasis:
    """Columns grouped into Jordan chains.

    ``chain_map`` lists ``(eigenvalue, length, start_column)``; within a chain
    the first column is the eigenvector and (A - lambda I) f_i = f_{i-1}.
    """

    matrix: np.ndarray
    chain_map: tuple

    @classmethod
    def from_blocks(cls, p, blocks) -> "JordanBasis":
        """Basis from A = P J P^{-1} with J built from ``(eigenvalue, size)`` blocks."""
        p = as_matrix(p, square=True)
        chains = []
        start = 0
        for lam, size in blocks:
            chains.append((complex(lam), int(size), start))
            start += int(size)
        if start != p.shape[0]:
            raise InvalidInputError("block sizes do not add up to the dimension")
        return cls(p, tuple(chains))

    def chains(self):
        for lam, length, start in self.chain_map:
            yield lam, self.matrix[:, start:start + length]

    def chain_defect(self, a) -> float:
        """Largest violation of the chain relations."""
        a = np.asarray(a, dtype=complex)
        worst = 0.0
        for lam, cols in self.chains():
            b = a - lam * np.eye(a.shape[0])
            worst = max(worst, np.linalg.norm(b @ cols[:, 0]))
            for i in range(1, cols.shape[1]):
                worst = max(worst, np.linalg.norm(b @ cols[:, i] - cols[:, i - 1]))
        return float(worst)

    def is_invertible(self, tol: float = 1e-8) -> bool:
        s = singular_values(self.matrix)
        return bool(s[-1] > tol * s[0])


def jordan_matrix(blocks) -> np.ndarray:
    """Block-diagonal Jordan matrix, ones on the superdiagonal inside blocks."""
    n = sum(int(s) for _, s in blocks)
    j = np.zeros((n, n), dtype=complex)
    start = 0
    for lam, size in blocks:
        for i in range(start, start + size):
            j[i, i] = lam
            if i + 1 < start + size:
                j[i, i + 1] = 1.0
        start += size
    return j


def jordan_basis_including(a, basis: JordanBasis, x, tol: float = 1e-8) -> JordanBasis:
    """Swap one chain of ``basis`` for the chain generated by eigenvector ``x``.

    ``x`` is expanded in the basis. Among the chains of its eigenvalue, taken
    longest first, the last one whose eigenvector carries a non-zero
    coefficient is replaced; the replacement chain reuses the coefficients of
    ``x`` on every chain level, so it has the same length.
    """
    a = as_matrix(a, square=True)
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.shape[0] != a.shape[0]:
        raise InvalidInputError("vector length does not match the matrix")
    best = None
    for lam in {c[0] for c in basis.chain_map}:
        res = np.linalg.norm(a @ x - lam * x)
        if best is None or res < best[1]:
            best = (lam, res)
    if best is None or best[1] > tol * max(1.0, np.linalg.norm(x)):
        raise InvalidInputError("x is not an eigenvector for any eigenvalue in the basis")
    lam = best[0]
    coef = np.linalg.solve(basis.matrix, x)
    chains = sorted((c for c in basis.chain_map if c[0] == lam),
                    key=lambda c: (-c[1], c[2]))
    cutoff = 1e-10 * np.abs(coef).max()
    involved = [c for c in chains if abs(coef[c[2]]) > cutoff]
    if not involved:
        raise InvalidInputError("x has no component on an eigenvector of its eigenvalue")
    _, length, start = involved[-1]
    new = basis.matrix.copy()
    for i in range(length):
        col = np.zeros_like(x)
        for _, _, s in involved:
            col += coef[s] * basis.matrix[:, s + i]
        new[:, start + i] = col
    new[:, start] = x
    return JordanBasis(new, basis.chain_map)


def kernel_dimension(a, lam, tol: float = RANK_TOL) -> int:
    a = as_matrix(a, square=True)
    return null_space(a - lam * np.eye(a.shape[0]), tol).shape[1]
