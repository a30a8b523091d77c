"""Exception hierarchy shared by all modules."""


class DecInfoError(Exception):
    """Base class for every error raised by this package."""


class DivisibilityError(DecInfoError, ValueError):
    pass


class RangeError(DecInfoError, ValueError):
    pass


class NegativePsdError(DecInfoError, ValueError):
    pass


class SymmetryError(DecInfoError, ValueError):
    pass


class GridMismatchError(DecInfoError, ValueError):
    pass


class LengthMismatchError(DecInfoError, ValueError):
    pass


class CauchySchwarzViolation(DecInfoError, ValueError):
    pass


class RegularityViolation(DecInfoError, ValueError):
    """Raised when S_S * S_X - |S_SX|^2 vanishes on a band or is negative."""

    def __init__(self, message: str, bin_index: int | None = None):
        super().__init__(message)
        self.bin_index = bin_index


class DegenerateDenominator(DecInfoError, ArithmeticError):
    def __init__(self, message: str, bin_index: int | None = None):
        super().__init__(message)
        self.bin_index = bin_index


class SingularMatrix(DecInfoError, ArithmeticError):
    def __init__(self, message: str, bin_index: int | None = None):
        super().__init__(message)
        self.bin_index = bin_index


class IllConditioned(DecInfoError, ArithmeticError):
    def __init__(self, message: str, regularization: float = 0.0):
        super().__init__(message)
        self.regularization = regularization


class PreconditionError(DecInfoError, ValueError):
    pass


class SpectralDivisionByZero(DecInfoError, ZeroDivisionError):
    pass


class ConfigError(DecInfoError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
