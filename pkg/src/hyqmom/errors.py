"""Exception and warning types shared across the package."""


class HyqmomError(Exception):
    """Base class for all domain errors raised by this package."""


class NonPositiveDensityError(HyqmomError):
    """The zeroth moment must be strictly positive for this operation."""


class InsufficientOrderError(HyqmomError):
    """Not enough moments are available for the requested computation."""


class DegreeTooHighError(HyqmomError):
    """Polynomial degree exceeds the available moment order."""


class UnrealizableError(HyqmomError):
    """Moment vector is not the moment sequence of any non-negative measure.

    ``rank`` (when known) is the recursion depth where the violation surfaced.
    """

    def __init__(self, message: str = "", rank: int | None = None):
        self.rank = rank
        super().__init__(message)


class BoundaryBreakdownError(HyqmomError):
    """A pivot of the moment-to-recurrence transform vanished.

    The moment vector sits on (or numerically at) the boundary of moment
    space; ``rank`` is the number of atoms of the representing measure.
    """

    def __init__(self, rank: int, message: str | None = None):
        self.rank = rank
        super().__init__(message or f"recurrence pivot vanished at rank {rank}")


class InvalidCoefficientsError(HyqmomError):
    """Recurrence coefficients violate b_0 > 0, interior b_k > 0, last b_k >= 0."""


class NegativeOffdiagonalError(HyqmomError):
    """Jacobi matrix off-diagonal entries must be square roots of b_k >= 0."""


class ConvergenceFailureError(HyqmomError):
    """Tridiagonal eigensolver exceeded its sweep budget."""


class DegenerateWaveFanError(HyqmomError):
    """HLL wave fan collapsed: left and right wave speeds coincide."""


class RealizabilityLossError(HyqmomError):
    """A finite-volume update produced an unrealizable cell."""

    def __init__(self, cell: int, time: float, message: str | None = None):
        self.cell = cell
        self.time = time
        super().__init__(message or f"cell {cell} became unrealizable at t={time:.6g}")


class GammaOutOfRangeWarning(UserWarning):
    """|gamma| >= 5/2 leaves the strictly hyperbolic range of the n=2 family."""


class PostulatedHyperbolicityWarning(UserWarning):
    """Global hyperbolicity is proven only for n <= 9; larger n is postulated
    and checked numerically through root interlacing."""
