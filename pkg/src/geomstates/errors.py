"""Exception types shared across the package."""


class GeomstatesError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(GeomstatesError, ValueError):
    """Unsupported or inconsistent dimension (n < 2, mismatched lengths)."""


class NonHermitianError(GeomstatesError, ValueError):
    """A matrix required to be Hermitian is not, beyond tolerance."""


class BasisMismatchError(GeomstatesError, ValueError):
    """Operands were built over different observable bases."""


class NotAStateError(GeomstatesError, ValueError):
    """A matrix or coordinate vector does not describe a density state."""


class DegeneratePointError(GeomstatesError, ValueError):
    """The requested pointwise construction degenerates (e.g. at x = 0,
    where no Hamiltonian directions exist)."""


class DegreeOverflowError(GeomstatesError, ArithmeticError):
    """A polynomial operation left the degree-2 coefficient space: cubic or
    quartic terms failed to cancel within tolerance."""


class InvariantViolationError(GeomstatesError, ValueError):
    """An input violates a structural precondition (non-traceless H,
    non-affine generator where an affine one is required, ...)."""


class IntegrationDivergedError(GeomstatesError, RuntimeError):
    """A trajectory left the state body beyond the positivity slack."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class LimitExistsError(GeomstatesError, ValueError):
    """Limit-set analysis was requested for a flow whose tensor families
    converge; the contracted algebra should be used instead."""


class ContractionMismatchError(GeomstatesError, RuntimeError):
    """Two evolutions expected to define the same contraction produced
    different product tables."""
