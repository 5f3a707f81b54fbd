"""Exception and warning classes raised across the toolkit."""


class CVError(Exception):
    """Base class for all toolkit errors."""


class UnphysicalState(CVError, ValueError):
    """Covariance matrix violates the uncertainty principle (or is malformed)."""


class NumericalFailure(CVError, ArithmeticError):
    """A linear-algebra routine failed or two equivalent estimators disagree."""


class DomainError(CVError, ValueError):
    """Argument outside the mathematical domain of a function."""


class DimensionError(CVError, ValueError):
    """Operation called on a state with the wrong number of modes."""


class ParameterError(CVError, ValueError):
    """Channel or sweep parameter out of range."""


class PlanError(CVError, ValueError):
    """Acquisition plan requests quadratures that cannot be measured jointly."""


class MissingDataError(CVError, KeyError):
    """Sample set lacks the rows needed for a reconstruction."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__("missing quadrature rows: " + ", ".join(map(str, self.missing)))

    def __str__(self):
        return self.args[0]


class FormatError(CVError, ValueError):
    """Malformed sample or state file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LengthMismatchError(FormatError):
    """Ragged row in a jointly acquired sample file."""


class InsufficientDataError(CVError, ValueError):
    """Too few samples for the requested blocking."""


class NoCrossingError(CVError, ValueError):
    """Threshold bracket does not contain a sign change."""


class SweepPointError(CVError):
    """Failure at a specific grid point of a sweep."""

    def __init__(self, index, value, cause):
        self.index = index
        self.value = value
        super().__init__(f"grid point {index} (value={value!r}) failed: {cause}")


class ReconstructionWarning(UserWarning):
    """Reconstructed matrix needed clamping or used a declared convention."""
