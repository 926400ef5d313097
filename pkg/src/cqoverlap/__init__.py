"""Min/max Hilbert-Schmidt output overlap of classical-quantum channels
over orthogonal input pairs: closed forms, oracles, verifier protocols,
reduction channels and a conjecture scanner."""

__version__ = "0.1.0"

from .channel import CQChannel, apply, basis_channel, gram, mixed_average, overlap, random_channel
from .characterization import (
    delta,
    k_max_bound,
    lemma_scs_sides,
    max_overlap_closed_form,
    min_bound_nonorthogonal,
    min_overlap_closed_form,
    theta,
    vertex_scan,
)
from .linalg import (
    DensityMatrix,
    PureState,
    hs_overlap,
    pure_state,
    purity,
    random_density,
    random_orthonormal_tuple,
    validate_density,
)
from .oracle import OptimizerConfig, OracleResult, continuous_extremum, gradient_check, grid_extremum

__all__ = [
    "CQChannel",
    "DensityMatrix",
    "OptimizerConfig",
    "OracleResult",
    "PureState",
    "apply",
    "basis_channel",
    "continuous_extremum",
    "delta",
    "gradient_check",
    "gram",
    "grid_extremum",
    "hs_overlap",
    "k_max_bound",
    "lemma_scs_sides",
    "max_overlap_closed_form",
    "min_bound_nonorthogonal",
    "min_overlap_closed_form",
    "mixed_average",
    "overlap",
    "pure_state",
    "purity",
    "random_channel",
    "random_density",
    "random_orthonormal_tuple",
    "theta",
    "validate_density",
    "vertex_scan",
]
