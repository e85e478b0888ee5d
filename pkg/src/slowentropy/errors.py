"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes, so keep the classes stable.
"""


class SlowEntropyError(Exception):
    """Base class for all package errors."""


class InvalidArgument(SlowEntropyError, ValueError):
    pass


class UnsupportedOperation(SlowEntropyError, NotImplementedError):
    pass


class InsufficientFiberData(SlowEntropyError, RuntimeError):
    """Raised when name-conditioning leaves too few points in a fiber."""


class NumericalDegeneracy(SlowEntropyError, ArithmeticError):
    pass
