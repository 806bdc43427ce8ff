"""Exception hierarchy shared by all modules (and mapped to CLI exit codes)."""


class IceEntropyError(Exception):
    exit_code = 1


class GraphError(IceEntropyError, ValueError):
    """Malformed input or a graph that violates an operation's precondition."""

    exit_code = 2


class ResourceLimitError(IceEntropyError):
    """The exact or enumerative path would exceed a configured size limit."""

    exit_code = 3


class ConvergenceError(IceEntropyError):
    """An iterative method did not converge within its iteration cap."""

    exit_code = 4
