"""Exception hierarchy for catkit."""


class CatkitError(Exception):
    """Base class for every error raised by catkit."""


class InvalidDimensionError(CatkitError, ValueError):
    pass


class OutOfRangeError(CatkitError, ValueError):
    pass


class DimensionMismatchError(CatkitError, ValueError):
    pass


class TruncationError(CatkitError, ValueError):
    """Raised when the Fock cutoff cannot hold a state to within ``tail_tol``.

    ``min_dim`` carries the smallest cutoff that would be adequate, when it
    can be computed.
    """

    def __init__(self, message: str, min_dim: int | None = None):
        super().__init__(message)
        self.min_dim = min_dim


class DegenerateStateError(CatkitError, ValueError):
    pass


class NonHermitianError(CatkitError, ValueError):
    pass


class DegenerateWitnessError(CatkitError, RuntimeError):
    """Every mixing weight produced a vanishing Gaussian floor."""


class UnsupportedStateError(CatkitError, ValueError):
    pass
