"""Exception and warning types raised by fracsep."""


class FracSepError(Exception):
    """Base class for all fracsep errors."""


class InvalidParameterError(FracSepError, ValueError):
    pass


class InvalidRegimeError(FracSepError, ValueError):
    """An asymptotic expansion was requested for an argument that is too small."""


class NoConvergenceError(FracSepError, RuntimeError):
    """The implicit corrector equation of a time step could not be solved."""


class BlowUpError(FracSepError, RuntimeError):
    pass


class NonvanishingAtZeroError(FracSepError, ValueError):
    """f(t, 0) != 0 where the construction requires it."""


class NegativeLipschitzError(FracSepError, ValueError):
    pass


class BoundaryZeroError(FracSepError, ValueError):
    pass


class DegenerateBracketError(FracSepError, ArithmeticError):
    pass


class MaxIterExceededError(FracSepError, RuntimeError):
    pass


class BracketExpansionError(FracSepError, RuntimeError):
    pass


class ConfigError(FracSepError, ValueError):
    """Invalid experiment configuration. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StepSizeWarning(UserWarning):
    """h**alpha * L / Gamma(alpha + 2) >= 1, the implicit step may not be contractive."""


class GridAdjustmentWarning(UserWarning):
    pass


class LowConfidenceWarning(UserWarning):
    pass
