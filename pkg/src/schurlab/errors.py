"""Exception and warning types shared across the package."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition."""


class NumericFailure(ArithmeticError):
    """An iterative routine did not converge.

    ``residual`` carries the last measured residual and ``partial`` whatever
    was computed before giving up (may be ``None``).
    """

    def __init__(self, message, residual=float("nan"), partial=None):
        super().__init__(message)
        self.residual = residual
        self.partial = partial


class PairingFailure(ArithmeticError):
    """Backward pairing broke down: the perturbation is too large for A0."""


class InvariantViolation(RuntimeError):
    """A computed result failed one of its post-conditions."""


class RankAmbiguityWarning(UserWarning):
    """A singular value sits close to the rank threshold."""
