"""Exception types"""

class ObliviousError(Exception):
    """Base class for all package errors"""

class InvalidArgumentError(ObliviousError, ValueError):
    """Argument violates an operation precondition"""

class CapabilityError(ObliviousError, RuntimeError):
    """Requested size exceeds what the oracle or field tables support"""

class ConvergenceError(ObliviousError, RuntimeError):
    """Iterative routine failed to converge"""

class RejectionLimitError(ObliviousError, RuntimeError):
    """Rejection sampling exceeded its cap"""

class TapeExhaustedError(ObliviousError, RuntimeError):
    """Fixed bit tape has no bits left"""

class MatrixFileError(ObliviousError, OSError):
    """Matrix, vector or perturbation file could not be read or written"""

    def __init__(self, path, message : str, line : int | None = None) -> None:
        self.path = str(path)
        self.line = line
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {message}")
