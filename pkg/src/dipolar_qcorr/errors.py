"""Exception and warning types shared across the package."""


class NumericFailure(ArithmeticError):
    """A numerical routine diverged, produced NaN, or hit its iteration cap."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class AccuracyWarning(UserWarning):
    """Round-off drift was large enough that the result had to be corrected."""
