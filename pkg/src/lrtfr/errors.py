class LrtfrError(Exception):
    """Base class for library errors."""


class ContractError(LrtfrError, ValueError):
    """An argument violates a documented precondition."""


class DimensionError(ContractError):
    """Array shapes are incompatible."""


class DomainError(ContractError):
    """A coordinate lies outside the model's domain."""


class NumericalError(LrtfrError, ArithmeticError):
    """A computation produced NaN/Inf or failed to converge."""


class FormatError(LrtfrError, OSError):
    """A file does not follow the expected binary or text layout."""


class UnsupportedConfigurationError(ContractError):
    """The requested analysis does not apply to this model."""
