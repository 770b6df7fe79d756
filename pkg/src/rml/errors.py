"""Exception hierarchy shared by every module of the package."""


class RmlError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParseError(RmlError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegreeCapError(RmlError):
    exit_code = 3


class InvalidPartitionError(RmlError):
    pass


class ImproperTripleSetError(RmlError):
    pass


class DomainError(RmlError):
    pass


class SizeGuardError(RmlError):
    pass


class SolverError(RmlError):
    """Raised when the LP/MIP engine cannot produce a usable answer."""

    def __init__(self, message: str, dump_path: str | None = None):
        self.dump_path = dump_path
        if dump_path:
            message = f"{message} (model written to {dump_path})"
        super().__init__(message)


class InfeasibleError(RmlError):
    exit_code = 5
