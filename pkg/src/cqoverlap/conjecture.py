"""Counterexample search for the k-state minimum-overlap conjecture.

The conjectured inequality says the average pairwise output overlap of
``k`` orthonormal inputs is at least the smallest average pairwise
overlap ``Tr(s_i s_j)`` over ``k`` distinct basis indices. For ``k = 2``
it is the proven minimum characterization, so any negative margin there
is a bug.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import CQChannel, mixed_average, random_channel
from .characterization import ENUMERATION_CAP, check_subset_count, subset_sums
from .errors import ArityError, ReproducibilityError
from .linalg import random_orthonormal_tuple
from .oracle import polish_tuple

log = logging.getLogger(__name__)

CANDIDATE_THRESHOLD = -1e-7
REVERIFY_TOL = 1e-9


@dataclass(frozen=True)
class ConjectureRecord:
    instance_seed: int
    n: int
    d: int
    k: int
    lhs: float
    rhs: float
    states_seed: int
    polished: bool = False

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def is_candidate(self) -> bool:
        return self.margin < CANDIDATE_THRESHOLD


def conjecture_rhs(ch: CQChannel, k: int, cap: int = ENUMERATION_CAP) -> float:
    """Minimum over k-subsets of the average off-diagonal Gram entry."""
    _, sums = subset_sums(ch.gram, k, cap, diagonal=False)
    return float(sums.min()) / (k * (k - 1))


def derive_seed(*parts: int) -> int:
    """Deterministic 32-bit child seed from integer parts."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def scan(
    n: int,
    d: int,
    k: int,
    instances: int,
    tuples_per_instance: int,
    seed: int,
    polish: bool = False,
) -> list[ConjectureRecord]:
    """One record per random channel, holding the smallest margin sampled.

    Channel ``t`` uses seed ``derive_seed(seed, t)``; its ``s``-th sampled
    tuple uses ``derive_seed(instance_seed, s)``. With ``polish=True`` the
    worst sampled tuple of every instance is further minimized locally.
    """
    if min(n, d, k, instances, tuples_per_instance) < 1:
        raise ArityError("all counts must be >= 1")
    check_subset_count(n, k, ENUMERATION_CAP)
    records = []
    for t in range(instances):
        inst_seed = derive_seed(seed, t)
        ch = random_channel(n, d, inst_seed)
        rhs = conjecture_rhs(ch, k)
        best_lhs, best_seed = math.inf, None
        for s in range(tuples_per_instance):
            st_seed = derive_seed(inst_seed, s)
            lhs = mixed_average(ch, random_orthonormal_tuple(n, k, st_seed))
            if lhs < best_lhs:
                best_lhs, best_seed = lhs, st_seed
        rec = ConjectureRecord(inst_seed, n, d, k, best_lhs, rhs, best_seed)
        if polish:
            rec = _polish(ch, rec)
        if rec.is_candidate:
            log.warning("counterexample candidate: instance_seed=%d margin=%.3e", inst_seed, rec.margin)
        records.append(rec)
    return records


def _polish(ch: CQChannel, rec: ConjectureRecord) -> ConjectureRecord:
    start = random_orthonormal_tuple(rec.n, rec.k, rec.states_seed)
    _, lhs = polish_tuple(ch, start, "minimize")
    return replace(rec, lhs=min(lhs, rec.lhs), polished=lhs < rec.lhs)


def _careful_gram(ch: CQChannel) -> list[list[float]]:
    flat = [(s.real.ravel(), s.imag.ravel()) for s in ch.stack]
    n = ch.n
    g = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            re_i, im_i = flat[i]
            re_j, im_j = flat[j]
            g[i][j] = g[j][i] = math.fsum(
                [float(x) for x in re_i * re_j] + [float(x) for x in im_i * im_j]
            )
    return g


def careful_lhs(ch: CQChannel, states) -> float:
    g = _careful_gram(ch)
    k = len(states)
    p = [[float(x) for x in np.abs(np.asarray(s)) ** 2] for s in states]
    terms = []
    for r in range(k):
        for s in range(k):
            if r != s:
                terms.extend(p[r][i] * p[s][j] * g[i][j] for i in range(ch.n) for j in range(ch.n))
    return math.fsum(terms) / (k * (k - 1))


def careful_rhs(ch: CQChannel, k: int) -> float:
    g = _careful_gram(ch)
    best = math.inf
    for subset in itertools.combinations(range(ch.n), k):
        total = math.fsum(g[i][j] for i in subset for j in subset if i != j)
        best = min(best, total)
    return best / (k * (k - 1))


def reverify(record: ConjectureRecord) -> ConjectureRecord:
    """Rebuild the instance from its seeds and recompute both sides with ``math.fsum``.

    Raises `ReproducibilityError` if either side moves by more than 1e-9.
    """
    ch = random_channel(record.n, record.d, record.instance_seed)
    states = random_orthonormal_tuple(record.n, record.k, record.states_seed)
    if record.polished:
        states, _ = polish_tuple(ch, states, "minimize")
    lhs = careful_lhs(ch, states)
    rhs = careful_rhs(ch, record.k)
    if abs(lhs - record.lhs) > REVERIFY_TOL or abs(rhs - record.rhs) > REVERIFY_TOL:
        raise ReproducibilityError(
            f"record does not reproduce: lhs {record.lhs!r} -> {lhs!r}, rhs {record.rhs!r} -> {rhs!r}"
        )
    return replace(record, lhs=lhs, rhs=rhs)


def confirmed_candidates(records) -> list[ConjectureRecord]:
    """Candidates whose margin is still below the threshold after `reverify`."""
    out = []
    for rec in records:
        if rec.is_candidate:
            fresh = reverify(rec)
            if fresh.is_candidate:
                out.append(fresh)
    return out
