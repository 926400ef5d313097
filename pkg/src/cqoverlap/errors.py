"""Exception hierarchy shared by every module of the package."""


class CQOverlapError(Exception):
    """Base class for all errors raised by cqoverlap."""


class DimensionError(CQOverlapError, ValueError):
    pass


class ValidationError(CQOverlapError, ValueError):
    """A matrix or vector failed a quantum-state invariant."""


class NotHermitian(ValidationError):
    def __init__(self, deviation):
        self.deviation = float(deviation)
        super().__init__(f"matrix is not Hermitian: max |M - M^H| = {self.deviation:.3e}")


class NotPSD(ValidationError):
    def __init__(self, min_eigenvalue):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(f"matrix is not PSD: min eigenvalue = {self.min_eigenvalue:.6g}")


class TraceNotOne(ValidationError):
    def __init__(self, trace):
        self.trace = complex(trace)
        shown = self.trace.real if abs(self.trace.imag) < 1e-15 else self.trace
        super().__init__(f"trace is not 1: Tr = {shown:.12g}")


class NotNormalized(ValidationError):
    def __init__(self, norm):
        self.norm = float(norm)
        super().__init__(f"state vector is not unit norm: |psi| = {self.norm:.12g}")


class InfeasibleError(CQOverlapError, ValueError):
    pass


class ArityError(CQOverlapError, ValueError):
    pass


class CapacityError(CQOverlapError, ValueError):
    pass


class OptimizerError(CQOverlapError, RuntimeError):
    pass


class WitnessError(CQOverlapError, ValueError):
    pass


class TableError(CQOverlapError, ValueError):
    pass


class ConfigError(CQOverlapError, ValueError):
    pass


class ReproducibilityError(CQOverlapError):
    pass
