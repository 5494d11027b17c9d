"""
Exception hierarchy for the granularity adjustment engine.

Every error carries the process exit code the CLI maps it to: input problems
exit with 2, numerical failures with 3.
"""
from typing import Any, Dict, Optional


class ConcentrationRiskError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1
    kind = 'error'

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """
        Initialize the error.

        Args:
            message: Human readable description
            details: Extra diagnostics carried to the JSON error output
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert the error to a dictionary.

        Returns:
            Dict: Error as dictionary
        """
        return {
            'error': self.kind,
            'type': type(self).__name__,
            'message': self.message,
            'exit_code': self.exit_code,
            'details': self.details,
        }


class InputValidationError(ConcentrationRiskError, ValueError):
    """Invalid input data, files or parameters."""

    exit_code = 2
    kind = 'input-validation'


class InvalidParameterError(InputValidationError):
    """A numeric parameter lies outside its admissible range."""


class SchemaViolationError(InputValidationError):
    """A file or settings tree does not match its schema."""


class EmptyPortfolioError(InputValidationError):
    """A portfolio file holds no obligors."""


class TooManyObligorsError(InputValidationError):
    """A portfolio exceeds the configured maximum number of obligors."""


class RowSumViolationError(InputValidationError):
    """A transition matrix row does not sum to one."""


class NegativeEntryError(InputValidationError):
    """A transition matrix holds a negative probability."""


class MissingLgdError(InputValidationError):
    """A default-state bond value was requested without a realized LGD."""


class KindMismatchError(InputValidationError):
    """A model or portfolio was used with the wrong model kind."""


class WidthMismatchError(InputValidationError):
    """A feature vector does not match the network input width."""


class MarketDataError(InputValidationError):
    """Market data could not be downloaded."""

    kind = 'market-data'


class ModelFileError(InputValidationError):
    """A persisted model file cannot be used."""


class ModelVersionError(ModelFileError):
    """A model file was written by an unsupported format version."""


class ModelChecksumError(ModelFileError):
    """A model file is truncated or its payload checksum does not match."""


class NumericalError(ConcentrationRiskError, ArithmeticError):
    """A numerical procedure failed."""

    exit_code = 3
    kind = 'numerical'


class NoSignChangeError(NumericalError):
    """Root bracketing found no sign change."""


class ZeroCapitalError(NumericalError):
    """The aggregate capital requirement is zero."""


class DegenerateDenominatorError(NumericalError):
    """A first-order adjustment denominator vanishes."""


class NegativePriceError(NumericalError):
    """A bond valuation produced a nonpositive price."""


class NonMonotoneError(NumericalError):
    """A function assumed monotone is not."""


class TrainingDivergedError(NumericalError):
    """Training loss exceeded the divergence limit."""


class LabelFailureError(NumericalError):
    """Too many training labels could not be computed."""
