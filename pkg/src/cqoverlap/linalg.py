"""Quantum-state containers, validation and seeded random instances.

Everything downstream works on dense complex numpy arrays. The two small
wrapper types exist so that a value which has passed validation can be
told apart from an arbitrary array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    InfeasibleError,
    NotHermitian,
    NotNormalized,
    NotPSD,
    TraceNotOne,
    ValidationError,
)

STATE_TOL = 1e-10
ORTHO_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated d x d Hermitian PSD matrix with unit trace."""

    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)


@dataclass(frozen=True, eq=False)
class PureState:
    """A validated unit-norm amplitude vector."""

    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> DensityMatrix:
        a = self.amplitudes
        return DensityMatrix(_frozen(np.outer(a, a.conj())))

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)


def as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.mat
    return np.asarray(x, dtype=complex)


def as_vector(x) -> np.ndarray:
    if isinstance(x, PureState):
        return x.amplitudes
    return np.asarray(x, dtype=complex)


def validate_density(m, tol: float = STATE_TOL) -> DensityMatrix:
    """Check ``m`` against the density-matrix invariants and wrap it.

    The checks run in the order Hermiticity, trace, positivity, and the
    first failure is raised (`NotHermitian`, `TraceNotOne` or `NotPSD`).
    The eigenvalue test runs on the symmetrized matrix ``(M + M^H)/2``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"density matrix must be square and non-empty, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    herm_dev = np.max(np.abs(m - m.conj().T))
    if herm_dev > tol:
        raise NotHermitian(herm_dev)
    tr = np.trace(m)
    if abs(tr - 1.0) > tol:
        raise TraceNotOne(tr)
    sym = 0.5 * (m + m.conj().T)
    lam_min = np.linalg.eigvalsh(sym)[0]
    if lam_min < -tol:
        raise NotPSD(lam_min)
    return DensityMatrix(_frozen(m))


def pure_state(amplitudes, tol: float = STATE_TOL) -> PureState:
    a = np.asarray(amplitudes, dtype=complex)
    if a.ndim != 1 or a.shape[0] < 1:
        raise DimensionError(f"state vector must be 1-D and non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("state vector has non-finite entries")
    norm = np.linalg.norm(a)
    if abs(norm - 1.0) > tol:
        raise NotNormalized(norm)
    return PureState(_frozen(a))


def basis_state(n: int, i: int) -> PureState:
    a = np.zeros(n, dtype=complex)
    a[i] = 1.0
    return PureState(_frozen(a))


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(_frozen(np.eye(d) / d))


def hs_overlap(rho, sigma) -> float:
    """Hilbert-Schmidt overlap Tr(rho sigma) of two states.

    Returns the real part, computed elementwise so that swapping the
    arguments gives a bitwise-identical result.
    """
    a, b = as_matrix(rho), as_matrix(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    imag = np.sum(a * b.T).imag
    if abs(imag) > STATE_TOL:
        raise ValidationError(f"Tr(rho sigma) has imaginary part {imag:.3e}; inputs are not Hermitian")
    return float(np.sum(a.real * b.real + a.imag * b.imag))


def purity(rho) -> float:
    return hs_overlap(rho, rho)


def ginibre_density(d: int, rng: np.random.Generator) -> np.ndarray:
    g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    w = g @ g.conj().T
    w = 0.5 * (w + w.conj().T)
    return w / np.trace(w).real


def random_density(d: int, seed) -> DensityMatrix:
    """Full-rank random state ``G G^H / Tr(G G^H)`` with complex Gaussian ``G``."""
    if d < 1:
        raise DimensionError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    return validate_density(ginibre_density(d, rng))


def haar_columns(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """First ``k`` columns of a Haar-random n x n unitary (QR of a Gaussian)."""
    g = (rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure_state(n: int, seed) -> PureState:
    if n < 1:
        raise DimensionError(f"dimension must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return pure_state(haar_columns(n, 1, rng)[:, 0])


def random_orthonormal_tuple(n: int, k: int, seed) -> list[PureState]:
    if n < 1 or k < 1:
        raise DimensionError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if k > n:
        raise InfeasibleError(f"cannot fit {k} orthonormal states in dimension {n}")
    rng = np.random.default_rng(seed)
    q = haar_columns(n, k, rng)
    return [PureState(_frozen(q[:, r])) for r in range(k)]
