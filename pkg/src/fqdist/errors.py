"""Exception hierarchy shared by every fqdist module."""


class FqdistError(Exception):
    """Base class for all library errors."""


class AssertionFailure(FqdistError):
    """A verified inequality or identity did not hold."""


class NonPrime(FqdistError, ValueError):
    pass


class DegreeOutOfRange(FqdistError, ValueError):
    pass


class FieldTooLarge(FqdistError, ValueError):
    pass


class DivisionByZero(FqdistError, ZeroDivisionError):
    pass


class FieldMismatch(FqdistError, ValueError):
    pass


class EmptySet(FqdistError, ValueError):
    pass


class SizeTooLarge(FqdistError, ValueError):
    pass


class NoSqrtMinusOne(FqdistError, ValueError):
    pass


class BadDimension(FqdistError, ValueError):
    pass


class MemoryCap(FqdistError, MemoryError):
    pass


class ToleranceExceeded(FqdistError, ArithmeticError):
    pass


class BudgetExceeded(FqdistError, RuntimeError):
    pass


class EvenCharacteristic(FqdistError, ValueError):
    pass


class ZeroPin(FqdistError, ValueError):
    pass


class BadFactorization(FqdistError, ValueError):
    pass


class CapExceeded(FqdistError, RuntimeError):
    def __init__(self, message: str, cell_id: str | None = None):
        super().__init__(message)
        self.cell_id = cell_id


class FormatError(FqdistError, ValueError):
    """Base for point-set file problems."""


class BadHeader(FormatError):
    pass


class BadModulus(FormatError):
    pass


class CoordinateOutOfRange(FormatError):
    pass


class SizeMismatch(FormatError):
    pass
