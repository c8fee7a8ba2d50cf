"""Exception classes. Each maps to a distinct CLI exit code."""


class CircApproxError(Exception):
    exit_code = 1


class BadInputError(CircApproxError, ValueError):
    """Arguments outside an operation's domain (arity, ranges, file contents)."""

    exit_code = 2


class ArityError(BadInputError):
    pass


class EmptySubcubeError(BadInputError):
    """Conditioning on a prefix that carries zero probability mass."""


class TargetMissedError(CircApproxError):
    """A construction finished but its measured agreement is below target."""

    exit_code = 3


class BudgetExhaustedError(CircApproxError):
    exit_code = 3


class ScaleGuardError(CircApproxError):
    """Requested instance is beyond what exhaustive enumeration can handle."""

    exit_code = 4
