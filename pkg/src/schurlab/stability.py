"""Perturbation experiments on eigenvalues and Schur factorizations.

* eigenvalue matching and Hoelder ratios |mu - lambda| / ||A - A0||^(1/n);
* backward pairing: given a Schur factorization of a perturbed A, rebuild a
  Schur factorization of A0 step by step next to it and measure the
  distance;
* forward instability: perturbations that merge Jordan blocks and push
  every eigenvector of A away from the first Schur vector of A0.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidInputError, InvariantViolation, PairingFailure
from .jordan import CLUSTER_TOL, cluster_representatives, gk_profile
from .linalg import RANK_TOL, as_matrix, ginibre, null_space, operator_norm, range_basis
from .schur import SchurForm, eigenvalues, schur_decompose

log = logging.getLogger(__name__)

RECON_TOL = 1e-8
PAIRING_MIN = 1e-6
CSV_COLUMNS = ("matrix_id", "seed", "epsilon", "norm_diff", "u_dist", "t_dist", "ratio")


# -- eigenvalue matching ---------------------------------------------------

class Pairing(NamedTuple):
    perm: list
    cost: float


def _perfect_matching(allowed, fixed):
    """Kuhn's augmenting paths; ``fixed`` maps left -> right and is kept."""
    n = len(allowed)
    match_right = [-1] * n
    used_right = set(fixed.values())
    for l, r in fixed.items():
        match_right[r] = l

    def augment(l, seen):
        for r in allowed[l]:
            if r in seen or r in used_right:
                continue
            seen.add(r)
            if match_right[r] == -1 or augment(match_right[r], seen):
                match_right[r] = l
                return True
        return False

    for l in range(n):
        if l in fixed:
            continue
        if not augment(l, set()):
            return False
    return True


def match_eigenvalues(spec0, spec) -> Pairing:
    """Bottleneck pairing: ``perm[j]`` indexes ``spec`` for ``spec0[j]``.

    Minimizes max_j |spec[perm[j]] - spec0[j]|; among optimal pairings the
    lexicographically smallest ``perm`` wins.
    """
    spec0 = np.asarray(spec0, dtype=complex).reshape(-1)
    spec = np.asarray(spec, dtype=complex).reshape(-1)
    n = spec0.size
    if spec.size != n:
        raise InvalidInputError("spectra must have equal length")
    if n == 0:
        return Pairing([], 0.0)
    cost = np.abs(spec0[:, None] - spec[None, :])
    levels = np.unique(cost)
    lo, hi = 0, levels.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        allowed = [list(np.flatnonzero(cost[j] <= levels[mid])) for j in range(n)]
        if _perfect_matching(allowed, {}):
            hi = mid
        else:
            lo = mid + 1
    bound = levels[lo]
    allowed = [list(np.flatnonzero(cost[j] <= bound)) for j in range(n)]
    fixed: dict = {}
    for j in range(n):
        for r in allowed[j]:
            if r in fixed.values():
                continue
            fixed[j] = r
            if _perfect_matching(allowed, fixed):
                break
            del fixed[j]
    perm = [int(fixed[j]) for j in range(n)]
    return Pairing(perm, float(bound))


@dataclass(frozen=True)
class HolderRecord:
    matched_dist: float
    norm_diff: float
    ratio_1n: float
    ratio_1: float | None


def holder_ratio(a0, a, cluster_tol: float = CLUSTER_TOL) -> HolderRecord:
    """Matched eigenvalue distance against ||A - A0||^(1/n) and ||A - A0||.

    The Lipschitz ratio is only reported when A and A0 have the same number
    of distinct eigenvalues at ``cluster_tol``.
    """
    a0 = as_matrix(a0, square=True)
    a = as_matrix(a, square=True)
    if a0.shape != a.shape:
        raise InvalidInputError("matrices must have equal dimensions")
    n = a0.shape[0]
    diff = operator_norm(a - a0)
    if diff == 0.0:
        raise InvalidInputError("A equals A0; ratios are undefined")
    ev0, ev = eigenvalues(a0), eigenvalues(a)
    dist = match_eigenvalues(ev0, ev).cost
    distinct0 = len(cluster_representatives(ev0, cluster_tol))
    distinct = len(cluster_representatives(ev, cluster_tol))
    ratio_1 = dist / diff if distinct0 == distinct else None
    return HolderRecord(dist, diff, dist / diff ** (1.0 / n), ratio_1)


# -- backward pairing ------------------------------------------------------

def _complete_near(u1, v):
    """Unitary with first column ``u1`` whose other columns track ``v``'s.

    The trailing columns of ``v`` are projected off ``u1`` and
    re-orthonormalized with modified Gram-Schmidt.
    """
    m = v.shape[0]
    q = np.empty_like(v)
    q[:, 0] = u1
    for j in range(1, m):
        w = v[:, j].copy()
        for _ in range(2):
            for i in range(j):
                w -= np.vdot(q[:, i], w) * q[:, i]
        q[:, j] = w / np.linalg.norm(w)
    return q


def _cluster_means(vals, tol):
    """Replace each eigenvalue by the mean of its cluster."""
    vals = np.asarray(vals, dtype=complex)
    reps = cluster_representatives(vals, tol)
    out = vals.copy()
    for i, v in enumerate(vals):
        out[i] = min((r for r, _ in reps), key=lambda r: abs(r - v))
    return out


def chain_head_spaces(b, rank_tol: float = RANK_TOL) -> list[np.ndarray]:
    """Orthonormal bases of ker B, ker B cap Im B, ker B cap Im B^2, ...

    The j-th space is spanned by the eigenvectors heading Jordan chains of
    length > j. The list stops before the first trivial space.
    """
    m = b.shape[0]
    ker = null_space(b, rank_tol)
    spaces = [ker]
    power = np.eye(m, dtype=complex)
    for _ in range(m - 1):
        power = power @ b
        rng = range_basis(power, rank_tol)
        if rng.shape[1] == 0:
            break
        off = ker - rng @ (rng.conj().T @ ker)
        y = null_space(off, rank_tol)
        if y.shape[1] == 0:
            break
        spaces.append(range_basis(ker @ y, rank_tol))
    return spaces


def _pick_eigenvector(spaces, v1, snap_radius):
    """Project ``v1`` onto the deepest head space within ``snap_radius``.

    Falls back to the full kernel. Returns the (unnormalized) projection.
    """
    proj = spaces[0] @ (spaces[0].conj().T @ v1)
    for q in reversed(spaces[1:]):
        cand = q @ (q.conj().T @ v1)
        if np.linalg.norm(v1 - cand) <= snap_radius:
            return cand
    return proj


def backward_reconstruct(a0, s: SchurForm, rank_tol: float = RANK_TOL,
                         cluster_tol: float = CLUSTER_TOL, snap: float = 1.0):
    """Schur factorization ``(u0, t0)`` of A0 built alongside ``s``.

    Step k reads v1, the first column of the k-th Hessenberg factor of ``s``,
    and the eigenvalue mu deflated there. With lambda the eigenvalue of A0
    paired to mu, v1 is projected onto ker(A0_k - lambda I) and normalized to
    u1; the step factor is u1 completed by the remaining columns of the
    A-side factor (projected and re-orthonormalized), so it stays close to
    that factor. Conjugating the active A0 block by it deflates lambda.

    When v1 lies within ``snap * ||A - A0||^(1/n)`` of the span of the heads
    of longer Jordan chains, it is projected there instead. A plain kernel
    projection would otherwise leave a tiny component on a short chain, and
    the next A0 block would then have a kernel that is exact but nearly
    degenerate, far from the A-side vector.

    Raises :class:`PairingFailure` when a projection is shorter than 1e-6.
    """
    a0 = as_matrix(a0, square=True)
    n = a0.shape[0]
    if s.u.shape != a0.shape:
        raise InvalidInputError("Schur form does not match A0 in size")
    delta = operator_norm(s.u @ s.t @ s.u.conj().T - a0)
    snap_radius = snap * delta ** (1.0 / n)
    lam0 = _cluster_means(eigenvalues(a0), cluster_tol)
    mus = np.diagonal(s.t)
    pairing = match_eigenvalues(mus, lam0)
    lambdas = lam0[pairing.perm]
    work = a0.copy()
    u0 = np.eye(n, dtype=complex)
    for k, v in enumerate(s.chain.blocks):
        blk = work[k:, k:]
        m = blk.shape[0]
        v1 = v[:, 0]
        spaces = chain_head_spaces(blk - lambdas[k] * np.eye(m), rank_tol)
        if spaces[0].shape[1] == 0:
            raise PairingFailure(f"step {k}: no kernel for eigenvalue {lambdas[k]}")
        proj = _pick_eigenvector(spaces, v1, snap_radius)
        size = np.linalg.norm(proj)
        if size < PAIRING_MIN:
            raise PairingFailure(f"step {k}: projection onto the kernel has norm {size:.3g}")
        w = _complete_near(proj / size, v)
        work[k:, :] = w.conj().T @ work[k:, :]
        work[:, k:] = work[:, k:] @ w
        work[k + 1:, k] = 0.0
        u0[:, k:] = u0[:, k:] @ w
    t0 = np.triu(work)
    return u0, t0


# -- experiment records ----------------------------------------------------

@dataclass(frozen=True)
class PerturbationTrial:
    epsilon: float
    seed: int
    index: int
    a: np.ndarray
    actual_norm_diff: float


@dataclass(frozen=True)
class BackwardRecord:
    trial: PerturbationTrial
    u: np.ndarray
    t: np.ndarray
    u0: np.ndarray
    t0: np.ndarray
    u_dist: float
    t_dist: float
    holder_ratio: float
    recon_residual: float


@dataclass
class ExperimentReport:
    matrix_id: str
    seed: int
    records: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def decade_maxima(self) -> dict:
        """Largest Hoelder ratio per epsilon, in the order epsilons appear."""
        out: dict = {}
        for r in self.records:
            eps = r.trial.epsilon
            out[eps] = max(out.get(eps, 0.0), r.holder_ratio)
        return out

    def rows(self) -> list[dict]:
        return [{
            "matrix_id": self.matrix_id,
            "seed": self.seed,
            "epsilon": r.trial.epsilon,
            "norm_diff": r.trial.actual_norm_diff,
            "u_dist": r.u_dist,
            "t_dist": r.t_dist,
            "ratio": r.holder_ratio,
        } for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows():
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "matrix_id": self.matrix_id,
            "seed": self.seed,
            "metadata": self.metadata,
            "decade_maxima": [[e, m] for e, m in self.decade_maxima().items()],
            "failures": self.failures,
            "records": self.rows(),
        }
        return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"

    def violations(self, tol: float | None = None) -> list[int]:
        """Indices of records whose A0 factorization residual is too large."""
        bad = []
        for i, r in enumerate(self.records):
            limit = RECON_TOL * max(1.0, self.metadata.get("norm_a0", 1.0)) if tol is None else tol
            if r.recon_residual > limit or np.abs(np.tril(r.t0, -1)).max(initial=0.0) > 0:
                bad.append(i)
        return bad


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"cannot serialize {type(x).__name__}")


# -- perturbation samplers -------------------------------------------------

Sampler = Callable[[np.random.Generator, float, np.ndarray], np.ndarray]


def ginibre_perturbation(rng: np.random.Generator, epsilon: float, a0) -> np.ndarray:
    """Complex Gaussian matrix rescaled to operator norm ``epsilon``."""
    g = ginibre(np.asarray(a0).shape[0], rng)
    return g * (epsilon / operator_norm(g))


def corner_perturbation(rng: np.random.Generator, epsilon: float, a0) -> np.ndarray:
    """``epsilon`` in the bottom-left corner and nothing else."""
    n = np.asarray(a0).shape[0]
    e = np.zeros((n, n), dtype=complex)
    e[n - 1, 0] = epsilon
    return e


def spectral_gap(a0, cluster_tol: float = CLUSTER_TOL) -> float:
    reps = [r for r, _ in cluster_representatives(eigenvalues(a0), cluster_tol)]
    if len(reps) < 2:
        return math.inf
    return min(abs(x - y) for i, x in enumerate(reps) for y in reps[i + 1:])


def safety_threshold(a0, cluster_tol: float = CLUSTER_TOL) -> float:
    """Largest epsilon with epsilon^(1/n) below half the spectral gap."""
    a0 = np.asarray(a0)
    gap = spectral_gap(a0, cluster_tol)
    if math.isinf(gap):
        return math.inf
    return (gap / 2.0) ** a0.shape[0]


def backward_trial(a0, e, epsilon: float, seed: int, index: int,
                   order="descending", rank_tol: float = RANK_TOL,
                   cluster_tol: float = CLUSTER_TOL) -> BackwardRecord:
    a0 = np.asarray(a0, dtype=complex)
    n = a0.shape[0]
    a = a0 + e
    diff = operator_norm(a - a0)
    trial = PerturbationTrial(epsilon, seed, index, a, diff)
    s = schur_decompose(a, order)
    u0, t0 = backward_reconstruct(a0, s, rank_tol, cluster_tol)
    u_dist = operator_norm(s.u - u0)
    t_dist = operator_norm(s.t - t0)
    recon = operator_norm(u0 @ t0 @ u0.conj().T - a0)
    ratio = (u_dist + t_dist) / diff ** (1.0 / n)
    return BackwardRecord(trial, s.u, s.t, u0, t0, u_dist, t_dist, ratio, recon)


def measure_backward(a0, eps_decades: Sequence[float], trials_per_decade: int, seed: int,
                     sampler: Sampler = ginibre_perturbation, matrix_id: str = "A0",
                     check_threshold: bool = True, rank_tol: float = RANK_TOL,
                     cluster_tol: float = CLUSTER_TOL) -> ExperimentReport:
    """Backward-pairing sweep over ``eps_decades``.

    Trial ``i`` of decade ``d`` draws from ``default_rng([seed, d, i])`` and
    nothing else, so trials are independent and reproducible. Pairing
    failures are logged in ``report.failures`` and left out of the maxima.
    """
    a0 = as_matrix(a0, square=True)
    eps = [float(e) for e in eps_decades]
    if any(e <= 0 for e in eps) or any(eps[i] <= eps[i + 1] for i in range(len(eps) - 1)):
        raise InvalidInputError("eps_decades must be positive and strictly decreasing")
    if trials_per_decade < 0:
        raise InvalidInputError("trials_per_decade must be non-negative")
    threshold = safety_threshold(a0, cluster_tol)
    if check_threshold and eps and eps[0] >= threshold:
        raise InvalidInputError(
            f"epsilon {eps[0]:g} is not below the safety threshold {threshold:g}")
    report = ExperimentReport(matrix_id, seed, metadata={
        "n": a0.shape[0],
        "norm_a0": operator_norm(a0),
        "eps_decades": eps,
        "trials_per_decade": trials_per_decade,
        "safety_threshold": threshold if math.isfinite(threshold) else None,
        "rank_tol": rank_tol,
        "cluster_tol": cluster_tol,
        "sampler": getattr(sampler, "__name__", str(sampler)),
    })
    for d, epsilon in enumerate(eps):
        for i in range(trials_per_decade):
            rng = np.random.default_rng([seed, d, i])
            e = sampler(rng, epsilon, a0)
            try:
                report.records.append(backward_trial(a0, e, epsilon, seed, i,
                                                     rank_tol=rank_tol, cluster_tol=cluster_tol))
            except PairingFailure as exc:
                log.info("pairing failure at eps=%g trial %d: %s", epsilon, i, exc)
                report.failures.append({"epsilon": epsilon, "trial": i, "reason": str(exc)})
    report.metadata["pairing_failures"] = len(report.failures)
    return report


# -- forward instability ---------------------------------------------------

def forward_demo_perturb(p0, j0, j_index: int, epsilon: float) -> np.ndarray:
    """A = P0 (J0 + J_eps) P0^{-1} with J_eps bridging the first two Jordan blocks.

    ``j_index`` (1-based) is the size of the first block of J0. J_eps holds
    epsilon / (||P0|| ||P0^{-1}||) at position (j_index, j_index + 1), so
    ||A - A0|| <= epsilon. The eigenvector P0 e_{j_index+1} heading the
    second block stops being an eigenvector; this is checked.
    """
    p0 = as_matrix(p0, square=True)
    j0 = as_matrix(j0, square=True)
    n = j0.shape[0]
    if p0.shape != j0.shape:
        raise InvalidInputError("P0 and J0 must have equal size")
    if epsilon < 0:
        raise InvalidInputError("epsilon must be non-negative")
    j = int(j_index)
    if not 1 <= j < n:
        raise InvalidInputError(f"j_index must lie in [1, {n - 1}]")
    if np.any(np.tril(j0, -1) != 0):
        raise InvalidInputError("J0 must be upper triangular (a Jordan matrix)")
    if j0[j - 1, j] != 0 or j0[j - 1, j - 1] != j0[j, j]:
        raise InvalidInputError(
            "j_index must separate two Jordan blocks of the same eigenvalue")
    p_inv = np.linalg.inv(p0)
    cond = operator_norm(p0) * operator_norm(p_inv)
    a0 = p0 @ j0 @ p_inv
    bridge = np.zeros((n, n), dtype=complex)
    bridge[j - 1, j] = epsilon / cond
    a = p0 @ (j0 + bridge) @ p_inv
    if epsilon > 0:
        u1 = p0[:, j] / np.linalg.norm(p0[:, j])
        lam = j0[j, j]
        if np.linalg.norm(a @ u1 - lam * u1) == 0.0:
            raise InvariantViolation("designated eigenvector survived the perturbation")
    if operator_norm(a - a0) > epsilon * (1 + 1e-12) + 1e-15:
        raise InvariantViolation("perturbation exceeds epsilon")
    return a


def forward_gap_lower_bound(a0, u0, t0, a, phase_samples: int = 0,
                            rank_tol: float = 1e-12, cluster_tol: float = CLUSTER_TOL,
                            slack: float = 1e-9) -> float:
    """Lower bound on inf ||U - u0|| over Schur factorizations A = U T U^*.

    Any such U has a unit eigenvector of A as first column, so the bound is
    min over eigenspaces E of A and unit v in E, phases phi, of
    ||u0 e_1 - phi v|| = sqrt(2 - 2 ||Q_E^* u0 e_1||), less ``slack``.
    ``phase_samples > 0`` additionally checks the closed form against a
    sampled phase grid.
    """
    a0 = as_matrix(a0, square=True)
    a = as_matrix(a, square=True)
    u0 = as_matrix(u0, square=True)
    t0 = as_matrix(t0, square=True)
    n = a.shape[0]
    scale = max(1.0, operator_norm(a0))
    if operator_norm(u0 @ t0 @ u0.conj().T - a0) > RECON_TOL * scale:
        raise InvalidInputError("(u0, t0) is not a factorization of A0")
    w = u0[:, 0]
    best = math.inf
    for lam, _ in cluster_representatives(eigenvalues(a), cluster_tol):
        q = null_space(a - lam * np.eye(n), rank_tol)
        if q.shape[1] == 0:
            continue
        c = q.conj().T @ w
        overlap = min(float(np.linalg.norm(c)), 1.0)
        dist = math.sqrt(max(2.0 - 2.0 * overlap, 0.0))
        if phase_samples > 0 and overlap > 0:
            v = q @ (c / np.linalg.norm(c))
            phis = np.exp(2j * np.pi * np.arange(phase_samples) / phase_samples)
            sampled = min(np.linalg.norm(w - phi * v) for phi in phis)
            if sampled < dist - 1e-12:
                raise InvariantViolation("sampled phase beat the closed-form minimum")
        best = min(best, dist)
    if math.isinf(best):
        raise InvariantViolation("no eigenvector of A resolved at the rank tolerance")
    return max(best - slack, 0.0)


def first_block_size(j0) -> int:
    """Size of the leading Jordan block of a Jordan matrix."""
    j0 = np.asarray(j0)
    n = j0.shape[0]
    for i in range(n - 1):
        if j0[i, i + 1] == 0:
            return i + 1
    return n


def forward_demo(p0, j0, epsilons: Sequence[float], rank_tol: float = 1e-12) -> list[dict]:
    """Run the block-bridging perturbation over ``epsilons`` and bound the drift.

    The reference factorization of A0 puts the head of the second Jordan
    block first.
    """
    p0 = as_matrix(p0, square=True)
    j0 = as_matrix(j0, square=True)
    j = first_block_size(j0)
    a0 = p0 @ j0 @ np.linalg.inv(p0)
    u1 = p0[:, j] / np.linalg.norm(p0[:, j])
    ref = schur_decompose(a0, leading_vector=u1)
    prof0 = gk_profile(a0, rank_tol=rank_tol)
    rows = []
    for eps in epsilons:
        a = forward_demo_perturb(p0, j0, j, eps)
        bound = forward_gap_lower_bound(a0, ref.u, ref.t, a, rank_tol=rank_tol)
        prof = gk_profile(a, rank_tol=rank_tol)
        rows.append({
            "epsilon": float(eps),
            "norm_diff": operator_norm(a - a0),
            "lower_bound": bound,
            "gk_m0": list(prof0.aggregate_m),
            "gk_m": list(prof.aggregate_m),
            "gk_differs": not prof.same_structure(prof0),
        })
    return rows


# -- structured families ---------------------------------------------------

def sqrt_splitting_pair(epsilon: float):
    """A0 = [[0, 0], [1, 0]] and A = [[0, eps], [1, 0]]: eigenvalues +-sqrt(eps)."""
    a0 = np.array([[0, 0], [1, 0]], dtype=complex)
    a = a0.copy()
    a[0, 1] = epsilon
    return a0, a


def shear_pair(epsilon: float, value: complex = 2.0):
    """A0 = value * I and A = A0 + eps e_2 e_1^T.

    The identity is a Schur factor of A0, while every Schur factor of A
    starts with e_2, so the two stay sqrt(2) apart however small eps is.
    """
    a0 = value * np.eye(2, dtype=complex)
    a = a0.copy()
    a[1, 0] = epsilon
    return a0, a
