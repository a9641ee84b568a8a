"""Exception hierarchy shared by every module.

The CLI maps :class:`DomainError`, :class:`ArgumentError`, :class:`ContractError`,
:class:`ConvergenceError` and :class:`NumericError` to exit status 1.
"""


class LoewnerError(Exception):
    """Base class for all toolkit errors."""


class DomainError(LoewnerError, ValueError):
    """An input lies outside the domain of the requested map or operation."""


class ArgumentError(LoewnerError, ValueError):
    """An argument is malformed, e.g. non-finite."""


class ContractError(LoewnerError, ValueError):
    """A precondition between arguments is violated (e.g. capacity not normalized)."""


class ConvergenceError(LoewnerError, ArithmeticError):
    """An iterative solve failed.  Carries the last iterate and its residual."""

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


class NumericError(LoewnerError, ArithmeticError):
    """A computed value left its admissible set.  ``index`` locates the step or sample."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class AccuracyWarning(UserWarning):
    """Emitted when an estimate is computed outside its reliable regime."""


class FormatError(LoewnerError, ValueError):
    """A data file could not be parsed.  ``line`` is 1-based."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
