"""SWAP-test statistics, overlap verifiers and the hardness-reduction channels.

Verifier circuits are represented by acceptance tables: ``probs[y]`` is the
probability that the verifier accepts the classical witness ``y``. The
reductions only ever use these numbers, so no circuit is simulated.

Bitstrings are read with the first character as the first bit ``y_1``;
the channel input index of ``y`` is ``int(y, 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import CQChannel, overlap
from .characterization import max_overlap_closed_form, min_overlap_closed_form, plus_minus_pair
from .errors import ArityError, ConfigError, TableError, WitnessError
from .linalg import hs_overlap

MAX_TABLE_BITS = 10


@dataclass(frozen=True)
class SwapTestResult:
    exact_accept: float
    empirical_accept: float
    shots: int

    @property
    def sigma(self) -> float:
        """Binomial standard error of the empirical frequency."""
        p = self.exact_accept
        return math.sqrt(max(p * (1 - p), 0.0) / self.shots)


@dataclass(frozen=True)
class AcceptanceTable:
    bits: int
    probs: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.bits, int) or isinstance(self.bits, bool) or not 1 <= self.bits <= MAX_TABLE_BITS:
            raise TableError(f"bits must be an integer in [1, {MAX_TABLE_BITS}], got {self.bits!r}")
        for y, p in self.probs.items():
            if not isinstance(y, str) or len(y) != self.bits or set(y) - {"0", "1"}:
                raise TableError(f"key {y!r} is not a bitstring of length {self.bits}")
            if isinstance(p, bool) or not isinstance(p, (int, float)) or not (0.0 <= p <= 1.0):
                raise TableError(f"probability for {y!r} must be a number in [0, 1], got {p!r}")

    @property
    def size(self) -> int:
        return 1 << self.bits

    @property
    def missing(self) -> int:
        """Number of bitstrings absent from the table (implicitly p = 0)."""
        return self.size - len(self.probs)

    def dense(self) -> np.ndarray:
        out = np.zeros(self.size)
        for y, p in self.probs.items():
            out[int(y, 2)] = float(p)
        return out

    def bitstring(self, index: int) -> str:
        return format(index, f"0{self.bits}b")


@dataclass(frozen=True)
class GapReport:
    kind: str
    yes_value: float
    yes_threshold: float
    no_threshold: float
    verdict: str
    c: float
    s: float
    pair: tuple[int, int]


def swap_accept_prob(rho, sigma) -> float:
    return 0.5 + 0.5 * hs_overlap(rho, sigma)


def simulate_swap(rho, sigma, shots: int, seed) -> SwapTestResult:
    """Sample the SWAP-test ancilla outcome ``shots`` times.

    The accept count is Binomial(shots, p) with ``p = 1/2 + Tr(rho sigma)/2``.
    """
    if shots < 1:
        raise ArityError(f"shots must be >= 1, got {shots}")
    p = swap_accept_prob(rho, sigma)
    p = min(max(p, 0.0), 1.0)
    rng = np.random.default_rng(seed)
    hits = int(rng.binomial(shots, p))
    return SwapTestResult(p, hits / shots, shots)


def _check_witness(ch: CQChannel, i: int, j: int):
    if not (0 <= i < ch.n and 0 <= j < ch.n):
        raise WitnessError(f"indices ({i}, {j}) out of range for n={ch.n}")
    if i == j:
        raise WitnessError("the witness needs two distinct indices")


def so_verifier_accept(ch: CQChannel, i: int, j: int) -> float:
    """Accept iff the SWAP test on ``s_i, s_j`` fails: ``1/2 - Tr(s_i s_j)/2``."""
    _check_witness(ch, i, j)
    return 0.5 - 0.5 * hs_overlap(ch.sigmas[i], ch.sigmas[j])


def lo_verifier_accept(ch: CQChannel, i: int, j: int) -> float:
    """SWAP test on the outputs of ``(|i> +- |j>)/sqrt(2)``."""
    _check_witness(ch, i, j)
    u, v = plus_minus_pair(ch.n, i, j)
    return 0.5 + 0.5 * overlap(ch, u, v)


def _diag_state(d: int, weights: dict) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    for k, w in weights.items():
        m[k, k] += w
    return m


def build_so_channel(table: AcceptanceTable) -> CQChannel:
    """Two-qubit outputs ``p_y |y1, not y1><.| + (1 - p_y) |00><00|``.

    Two-qubit kets ``|b1 b2>`` map to basis index ``2*b1 + b2``.
    """
    probs = table.dense()
    sigmas = []
    for idx, p in enumerate(probs):
        y1 = int(table.bitstring(idx)[0])
        flagged = 2 * y1 + (1 - y1)
        sigmas.append(_diag_state(4, {flagged: p, 0: 1.0 - p}))
    return CQChannel(sigmas)


def build_lo_channel(table: AcceptanceTable) -> CQChannel:
    """Qubit outputs ``p_y |0><0| + (1 - p_y) I/2``."""
    probs = table.dense()
    sigmas = [_diag_state(2, {0: p + (1.0 - p) / 2, 1: (1.0 - p) / 2}) for p in probs]
    return CQChannel(sigmas)


def so_case_overlap(table: AcceptanceTable, y: int, z: int) -> float:
    """Output overlap of inputs ``y != z`` for the SO reduction, by cases on the first bit."""
    probs = table.dense()
    py, pz = probs[y], probs[z]
    same_first = table.bitstring(y)[0] == table.bitstring(z)[0]
    return py * pz + (1 - py) * (1 - pz) if same_first else (1 - py) * (1 - pz)


def lo_pair_value(table: AcceptanceTable, y: int, z: int) -> float:
    """``1/2 + (p_y + p_z)^2 / 8`` for the LO reduction."""
    probs = table.dense()
    return 0.5 + (probs[y] + probs[z]) ** 2 / 8


def classify_instance(ch: CQChannel, kind: str, c: float, s: float, tol: float = 1e-12) -> GapReport:
    """Place a channel relative to the SO/LO promise thresholds.

    SO is yes-like when the minimum overlap is ``<= 1 - c`` and no-like
    when it is ``>= 1 - s``; LO is yes-like when the maximum is ``>= c``
    and no-like when it is ``<= s``. Anything between is ambiguous.
    """
    kind = kind.upper()
    if not c > s:
        raise ConfigError(f"need c > s, got c={c}, s={s}")
    if kind == "SO":
        opt = min_overlap_closed_form(ch)
        yes_t, no_t = 1.0 - c, 1.0 - s
        if opt.value <= yes_t + tol:
            verdict = "yes-like"
        elif opt.value >= no_t - tol:
            verdict = "no-like"
        else:
            verdict = "ambiguous"
    elif kind == "LO":
        opt = max_overlap_closed_form(ch)
        yes_t, no_t = c, s
        if opt.value >= yes_t - tol:
            verdict = "yes-like"
        elif opt.value <= no_t + tol:
            verdict = "no-like"
        else:
            verdict = "ambiguous"
    else:
        raise ConfigError(f"kind must be SO or LO, got {kind!r}")
    return GapReport(kind, opt.value, yes_t, no_t, verdict, c, s, (opt.i, opt.j))
