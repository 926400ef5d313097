"""Closed-form optima of the output overlap over orthogonal input pairs.

For orthogonal pure inputs the minimum overlap is attained by a pair of
computational basis states and the maximum by ``(|i> +- |j>)/sqrt(2)`` for
a single pair ``i != j``. The non-orthogonal lower bound and the k-state
upper bound are also provided, together with the identities their proofs
rest on, so they can be checked numerically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .channel import CQChannel
from .errors import ArityError, CapacityError, DimensionError
from .linalg import ORTHO_TOL, PureState, _frozen, as_matrix, as_vector, basis_state, haar_columns

ENUMERATION_CAP = 10**6
_CHUNK = 1 << 15


@dataclass(frozen=True, eq=False)
class PairOptimum:
    value: float
    i: int
    j: int
    witness_u: PureState
    witness_v: PureState


@dataclass(frozen=True)
class NonOrthogonalBound:
    theta: float
    delta: float
    bound: float


@dataclass(frozen=True)
class SubsetOptimum:
    """Best k-subset ``T`` with ``value = g(v_T) / k^2``.

    ``vertex_value`` keeps the undivided ``g(v_T) = sum_{i,j in T} M_ij``.
    """

    value: float
    subset: tuple[int, ...]
    vertex_value: float


def _require_pairs(ch: CQChannel):
    if ch.n < 2:
        raise ArityError(f"need n >= 2, got {ch.n}")


def min_overlap_closed_form(ch: CQChannel) -> PairOptimum:
    """``min_{i != j} Tr(s_i s_j)`` with basis-state witnesses ``|i>, |j>``.

    Indices are 0-based; ties go to the lexicographically smallest pair.
    """
    _require_pairs(ch)
    m = ch.gram
    iu, ju = np.triu_indices(ch.n, 1)
    best = int(np.argmin(m[iu, ju]))
    i, j = int(iu[best]), int(ju[best])
    return PairOptimum(float(m[i, j]), i, j, basis_state(ch.n, i), basis_state(ch.n, j))


def plus_minus_pair(n: int, i: int, j: int) -> tuple[PureState, PureState]:
    h = np.sqrt(0.5)
    u = np.zeros(n, dtype=complex)
    v = np.zeros(n, dtype=complex)
    u[i], u[j] = h, h
    v[i], v[j] = h, -h
    return PureState(_frozen(u)), PureState(_frozen(v))


def pair_max_values(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``1/4 Tr((s_i + s_j)^2)`` for every ``i < j``, in lexicographic order."""
    iu, ju = np.triu_indices(m.shape[0], 1)
    d = np.diag(m)
    return iu, ju, 0.25 * (d[iu] + d[ju] + 2.0 * m[iu, ju])


def max_overlap_closed_form(ch: CQChannel) -> PairOptimum:
    """``max_{i != j} 1/4 Tr((s_i + s_j)^2)`` with the ``(|i> +- |j>)/sqrt 2`` witness."""
    _require_pairs(ch)
    iu, ju, vals = pair_max_values(ch.gram)
    best = int(np.argmax(vals))
    i, j = int(iu[best]), int(ju[best])
    u, v = plus_minus_pair(ch.n, i, j)
    return PairOptimum(float(vals[best]), i, j, u, v)


def theta(ch: CQChannel) -> float:
    return min_overlap_closed_form(ch).value


def delta(u, v) -> float:
    """Non-orthogonality slack of the lower bound ``theta * (1 - delta^2)``.

    ``max_j a_j b_j |<u|v>| / (sum_{i != j} a_i b_i + |<u|v>|)`` with
    ``a = |u|``, ``b = |v|`` entrywise, and 0 when ``|<u|v>| <= 1e-12``.
    """
    u, v = as_vector(u), as_vector(v)
    if u.shape != v.shape:
        raise DimensionError(f"dimension mismatch: {u.shape} vs {v.shape}")
    ip = abs(np.vdot(u, v))
    if ip <= ORTHO_TOL:
        return 0.0
    ab = np.abs(u) * np.abs(v)
    denom = ab.sum() - ab + ip
    return float(min(1.0, np.max(ab * ip / denom)))


def min_bound_nonorthogonal(ch: CQChannel, u, v) -> NonOrthogonalBound:
    u, v = as_vector(u), as_vector(v)
    if u.shape != (ch.n,) or v.shape != (ch.n,):
        raise DimensionError(f"inputs must have dimension {ch.n}, got {u.shape} and {v.shape}")
    t = theta(ch)
    dl = delta(u, v)
    return NonOrthogonalBound(t, dl, t * (1.0 - dl * dl))


def check_subset_count(n: int, k: int, cap: int) -> int:
    if not 2 <= k <= n:
        raise ArityError(f"k must satisfy 2 <= k <= n={n}, got {k}")
    count = math.comb(n, k)
    if count > cap:
        raise CapacityError(f"C({n},{k}) = {count} subsets exceeds enumeration cap {cap}")
    return count


def subset_sums(m: np.ndarray, k: int, cap: int = ENUMERATION_CAP, diagonal: bool = True):
    """Enumerate all k-subsets ``T`` in lexicographic order with ``sum_{i,j in T} M_ij``.

    With ``diagonal=False`` the ``i == j`` terms are left out. Returns the
    ``(C(n,k), k)`` index array and the matching sums.
    """
    n = m.shape[0]
    count = check_subset_count(n, k, cap)
    subsets = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), k)),
        dtype=np.intp,
        count=count * k,
    ).reshape(count, k)
    mm = np.array(m, dtype=float)
    if not diagonal:
        np.fill_diagonal(mm, 0.0)
    sums = np.empty(count)
    for lo in range(0, count, _CHUNK):
        idx = subsets[lo : lo + _CHUNK]
        sums[lo : lo + _CHUNK] = mm[idx[:, :, None], idx[:, None, :]].sum(axis=(1, 2))
    return subsets, sums


def vertex_scan(ch: CQChannel, k: int, cap: int = ENUMERATION_CAP) -> list[tuple[tuple[int, ...], float]]:
    """``g(v_T) = v_T^T M v_T`` at every 0/1 vertex of the rank-k diagonal polytope."""
    subsets, sums = subset_sums(ch.gram, k, cap)
    return [(tuple(int(x) for x in t), float(s)) for t, s in zip(subsets, sums)]


def k_max_bound(ch: CQChannel, k: int, cap: int = ENUMERATION_CAP) -> SubsetOptimum:
    """Exact ``max_{|T| = k} Tr((sum_{i in T} s_i)^2) / k^2`` by enumeration."""
    subsets, sums = subset_sums(ch.gram, k, cap)
    best = int(np.argmax(sums))
    g = float(sums[best])
    return SubsetOptimum(g / (k * k), tuple(int(x) for x in subsets[best]), g)


def g_value(ch: CQChannel, c) -> float:
    c = np.asarray(c, dtype=float)
    return float(c @ ch.gram @ c)


def projection_diagonal(n: int, k: int, seed) -> np.ndarray:
    """Diagonal of a random rank-k orthogonal projection on ``C^n``."""
    q = haar_columns(n, k, np.random.default_rng(seed))
    return np.sum(np.abs(q) ** 2, axis=1)


def lemma_scs_sides(alphas, betas, sigmas) -> tuple[float, float]:
    """Both sides of the moduli Cauchy-Schwarz identity.

    LHS = Tr(sum |a_i|^2 s_i * sum |b_j|^2 s_j) - Tr((sum |a_i||b_i| s_i)^2)
    RHS = 1/2 sum_{i,j} (|a_i||b_j| - |a_j||b_i|)^2 Tr(s_i s_j)

    The left side is formed from explicit matrix products, the right side
    from pairwise traces, so the two are computed independently.
    """
    a = np.abs(np.asarray(alphas, dtype=complex))
    b = np.abs(np.asarray(betas, dtype=complex))
    if not (len(a) == len(b) == len(sigmas)):
        raise ArityError(f"length mismatch: {len(a)} alphas, {len(b)} betas, {len(sigmas)} sigmas")
    s = np.stack([as_matrix(x) for x in sigmas])
    if s.ndim != 3 or s.shape[1] != s.shape[2]:
        raise DimensionError("sigmas must be square matrices of a common dimension")
    big_a = np.einsum("i,iab->ab", a * a, s)
    big_b = np.einsum("i,iab->ab", b * b, s)
    big_c = np.einsum("i,iab->ab", a * b, s)
    lhs = np.trace(big_a @ big_b) - np.trace(big_c @ big_c)
    traces = np.einsum("iab,jba->ij", s, s)
    w = np.outer(a, b) - np.outer(a, b).T
    rhs = 0.5 * np.sum(w * w * traces)
    return float(np.real(lhs)), float(np.real(rhs))
