"""Exception hierarchy shared by all frobkit modules."""


class FrobkitError(Exception):
    """Base class for toolkit errors."""


class DomainError(FrobkitError, ValueError):
    """A function was evaluated outside its real domain."""


class OrderExceeded(FrobkitError, ValueError):
    pass


class SingularMetric(FrobkitError, ArithmeticError):
    pass


class SingularJacobian(FrobkitError, ArithmeticError):
    pass


class SingularL(FrobkitError, ArithmeticError):
    pass


class SingularPoint(FrobkitError, ValueError):
    """The Painleve system was evaluated at (or integrated through) z = 0 or z = 1."""


class StepTooLarge(FrobkitError, RuntimeError):
    pass


class CoincidentCoordinates(FrobkitError, ValueError):
    pass


class BranchError(FrobkitError, LookupError):
    """No printed flat-coordinate branch matches the requested (d, constants)."""


class NoConvergence(FrobkitError, RuntimeError):
    pass


class UnknownFamily(FrobkitError, KeyError):
    pass
