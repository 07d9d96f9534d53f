from typing import Any, Dict, Optional


class SMGBError(Exception):
    """Base class for every error raised by this package."""


class InputError(SMGBError, ValueError):
    """Bad index, shape or argument supplied by the caller."""


class EdgeListParseError(InputError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class ConfigError(InputError):
    pass


class UnsupportedDimensionError(InputError):
    pass


class UndefinedMetricError(SMGBError, ValueError):
    pass


class NumericError(SMGBError, ArithmeticError):
    """
    Non-finite value or failed factorization. `diagnostics` carries whatever
    the raising site knew about the offending matrix.
    """

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class FitError(NumericError):
    def __init__(self, iteration: int, step: str, cause: Exception):
        self.iteration = iteration
        self.step = step
        self.cause = cause
        super().__init__(f"fit failed at outer iteration {iteration} in {step}: {cause}")
