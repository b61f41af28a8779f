"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to distinct process exit statuses without a lookup table.
"""


class RydchainError(Exception):
    exit_code = 1

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self),
                "exit_code": self.exit_code}


class ConfigurationError(RydchainError, ValueError):
    """Invalid or malformed run parameters (bad order, unknown config key, ...)."""
    exit_code = 2


class DomainError(RydchainError, ValueError):
    """An argument outside the mathematical domain of an operation."""
    exit_code = 3


class MembershipError(RydchainError, KeyError):
    """A configuration that does not belong to the resonant sector."""
    exit_code = 4

    def __str__(self):
        # KeyError quotes its message; keep it readable
        return str(self.args[0]) if self.args else ""


class ResourceError(RydchainError, MemoryError):
    """A requested object would exceed the configured memory budget."""
    exit_code = 5


class SolverError(RydchainError, RuntimeError):
    """The dense eigensolver failed to converge."""
    exit_code = 6


class EnsembleError(RydchainError, RuntimeError):
    """Too many samples in an ensemble cell failed."""
    exit_code = 7


class UsageError(RydchainError, ValueError):
    """Malformed command line (unknown flag, missing argument)."""
    exit_code = 64
