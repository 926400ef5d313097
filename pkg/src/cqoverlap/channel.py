"""Classical-quantum channels and the output-overlap objective.

A C-Q channel measures its input in the computational basis and emits a
fixed state ``sigmas[i]`` on outcome ``i``. The output overlap of two
inputs only depends on the moduli-squared profiles of their amplitudes,
so everything is computed through the Gram matrix ``M_ij = Tr(s_i s_j)``.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import ArityError, DimensionError
from .linalg import (
    DensityMatrix,
    _frozen,
    as_matrix,
    as_vector,
    ginibre_density,
    validate_density,
)


class CQChannel:
    """An ordered list of ``n >= 2`` output states of a common dimension ``d``."""

    def __init__(self, sigmas: Sequence):
        if len(sigmas) < 2:
            raise ArityError(f"a C-Q channel needs at least 2 outputs, got {len(sigmas)}")
        states = [s if isinstance(s, DensityMatrix) else validate_density(s) for s in sigmas]
        d = states[0].dim
        for idx, s in enumerate(states):
            if s.dim != d:
                raise DimensionError(f"sigma[{idx}] has dimension {s.dim}, expected {d}")
        self.sigmas: tuple[DensityMatrix, ...] = tuple(states)
        self._stack = _frozen(np.stack([s.mat for s in states]))
        self._gram = None

    @property
    def n(self) -> int:
        return len(self.sigmas)

    @property
    def d(self) -> int:
        return self.sigmas[0].dim

    @property
    def stack(self) -> np.ndarray:
        """Outputs as a read-only ``(n, d, d)`` array."""
        return self._stack

    @property
    def gram(self) -> np.ndarray:
        if self._gram is None:
            self._gram = gram_of_stack(self._stack)
        return self._gram

    def __repr__(self):
        return f"CQChannel(n={self.n}, d={self.d})"


def gram_of_stack(stack: np.ndarray) -> np.ndarray:
    re, im = stack.real, stack.imag
    m = np.einsum("iab,jab->ij", re, re) + np.einsum("iab,jab->ij", im, im)
    m = 0.5 * (m + m.T)
    m.setflags(write=False)
    return m


def gram(ch: CQChannel) -> np.ndarray:
    """Real symmetric PSD matrix of pairwise overlaps ``Tr(s_i s_j)``."""
    return ch.gram


def random_channel(n: int, d: int, seed) -> CQChannel:
    """Channel with ``n`` independent Ginibre outputs of dimension ``d``."""
    if n < 2:
        raise ArityError(f"n must be >= 2, got {n}")
    if d < 1:
        raise DimensionError(f"d must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    return CQChannel([validate_density(ginibre_density(d, rng)) for _ in range(n)])


def basis_channel(n: int) -> CQChannel:
    """The channel with ``s_i = |i><i|``, whose Gram matrix is the identity."""
    return CQChannel([np.diag(np.eye(n)[i]) for i in range(n)])


def constant_channel(n: int, sigma) -> CQChannel:
    return CQChannel([sigma] * n)


def moduli(u) -> np.ndarray:
    return np.abs(as_vector(u)) ** 2


def _check_input(ch: CQChannel, x, what="state"):
    x = as_vector(x)
    if x.shape != (ch.n,):
        raise DimensionError(f"{what} has shape {x.shape}, channel input dimension is {ch.n}")
    return x


def apply(ch: CQChannel, rho) -> DensityMatrix:
    """Output state ``sum_i rho_ii s_i``."""
    rho = as_matrix(rho)
    if rho.shape != (ch.n, ch.n):
        raise DimensionError(f"input has shape {rho.shape}, channel input dimension is {ch.n}")
    diag = np.real(np.diag(rho))
    out = np.einsum("i,iab->ab", diag, ch.stack)
    return DensityMatrix(_frozen(out))


def overlap(ch: CQChannel, u, v) -> float:
    """Output overlap ``p^T M q`` with ``p = |u|^2``, ``q = |v|^2``.

    Orthogonality of ``u`` and ``v`` is not required.
    """
    u = _check_input(ch, u, "u")
    v = _check_input(ch, v, "v")
    p, q = np.abs(u) ** 2, np.abs(v) ** 2
    return float(p @ ch.gram @ q)


def mixed_average(ch: CQChannel, states: Sequence) -> float:
    """Average pairwise output overlap of ``k >= 2`` input states.

    ``S = 1/(k(k-1)) * sum_{r != s} Tr(A_r A_s)`` with ``A_r`` the output of
    the ``r``-th state.
    """
    k = len(states)
    if k < 2:
        raise ArityError(f"need at least 2 states, got {k}")
    p = [np.abs(_check_input(ch, s)) ** 2 for s in states]
    m = ch.gram
    # r < s only; M is exactly symmetric so each unordered pair counts twice
    total = sum(float(p[r] @ m @ p[s]) for r in range(k) for s in range(r + 1, k))
    return 2.0 * total / (k * (k - 1))

