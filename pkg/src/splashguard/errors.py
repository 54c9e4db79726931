"""Exception hierarchy shared by all modules."""


class SplashGuardError(Exception):
    """Base class for every error raised by the package."""


class InvalidCurve(SplashGuardError, ValueError):
    pass


class SingularTarget(SplashGuardError):
    """Raised when a sheet target touches another sampled point of the curve."""


class QuadratureUnderflow(SplashGuardError):
    """Raised when a bulk region mask selects no cells."""


class NonIntegerPowerOfSigned(SplashGuardError, ValueError):
    pass


class NoSplashCandidate(SplashGuardError):
    pass


class GraphExtractionFailed(SplashGuardError):
    pass


class OutsideWindow(SplashGuardError, ValueError):
    pass


class InconsistentRepresentations(SplashGuardError):
    pass


class DomainError(SplashGuardError, ValueError):
    pass


class IllConditioned(SplashGuardError):
    pass


class StepRejected(SplashGuardError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class UsageError(SplashGuardError):
    pass


class ConfigError(SplashGuardError):
    """Configuration problem; carries the file/line of the offending key when known."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(loc + message)
        self.path = path
        self.line = line
