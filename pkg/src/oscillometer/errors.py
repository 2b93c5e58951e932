"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to its exit-code discipline without inspecting messages.
"""


class OscillometerError(Exception):
    exit_code = 3


class ConfigurationError(OscillometerError, ValueError):
    """Invalid configuration or usage (bad N, unknown key, p < 1, ...)."""

    exit_code = 2


class GridMismatchError(ConfigurationError):
    """Two objects that must share a grid do not."""


class InputError(OscillometerError, ValueError):
    """Input data is unusable, e.g. a non-finite sample."""


class UnderResolvedError(OscillometerError):
    """A ball region holds too few cells for a meaningful average."""


class InsufficientDataError(OscillometerError):
    """Too few usable points for a fit."""


class SolverError(OscillometerError):
    """A linear solve failed to reach its residual tolerance."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class NumericalError(OscillometerError, ArithmeticError):
    """Rank deficiency or a similar breakdown in a dense computation."""
