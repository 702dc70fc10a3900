"""Exception hierarchy shared by all modules."""


class SiegelLabError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(SiegelLabError, ValueError):
    pass


class SingularMatrixError(SiegelLabError, ArithmeticError):
    def __init__(self, message, det_abs=0.0):
        super().__init__(f"{message} (|det| = {det_abs:.3e})")
        self.det_abs = det_abs


class NotPositiveDefiniteError(SiegelLabError, ValueError):
    def __init__(self, message, eigenvalue=None):
        if eigenvalue is not None:
            message = f"{message} (offending eigenvalue {eigenvalue:.6e})"
        super().__init__(message)
        self.eigenvalue = eigenvalue


class ConvergenceError(SiegelLabError, RuntimeError):
    def __init__(self, message, last_values=None):
        super().__init__(message)
        self.last_values = last_values


class SpectralValidityError(SiegelLabError, ValueError):
    """Cross-ratio eigenvalue outside [0, 1) or with a non-negligible imaginary part."""


class NotSymplecticError(SiegelLabError, ValueError):
    def __init__(self, message, entry=None):
        super().__init__(message)
        self.entry = entry


class ParameterError(SiegelLabError, ValueError):
    pass


class PreconditionError(SiegelLabError, ValueError):
    pass


class KernelRangeError(SiegelLabError, OverflowError):
    def __init__(self, message, exponent=None):
        super().__init__(message)
        self.exponent = exponent


class AbsenceError(SiegelLabError, LookupError):
    pass


class DegenerateEstimateError(SiegelLabError, RuntimeError):
    pass


class CacheFormatError(SiegelLabError, ValueError):
    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class PointFormatError(SiegelLabError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column
