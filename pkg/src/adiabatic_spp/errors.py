"""Exception hierarchy shared by the library and the command line."""


class SppError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class ValidationError(SppError, ValueError):
    exit_code = 2


class CapacityError(SppError):
    """Requested size exceeds what an exhaustive/dense routine can hold."""

    exit_code = 3


class NumericalError(SppError, ArithmeticError):
    exit_code = 4
