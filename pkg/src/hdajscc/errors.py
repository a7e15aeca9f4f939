"""Exception hierarchy shared by every module."""


class HdaError(Exception):
    """Base class for model and configuration errors (CLI exit code 1)."""


class ContractViolationError(HdaError, ValueError):
    """Inputs do not satisfy an operation's preconditions (shapes, ranges)."""


class InvalidParameterError(ContractViolationError):
    """A scenario parameter is outside its admissible range."""


class InvalidCovarianceError(HdaError, ValueError):
    """A covariance matrix is not symmetric positive semidefinite."""


class InfeasibleDesignError(HdaError, ValueError):
    """The requested scheme cannot be built for these parameters (e.g. kappa^2 < 0)."""


class UnsupportedConfigurationError(HdaError, ValueError):
    """The combination of options is valid in principle but not modelled."""


class CodebookTooLargeError(HdaError, MemoryError):
    """Codebook size exceeds the desk-scale cap."""
