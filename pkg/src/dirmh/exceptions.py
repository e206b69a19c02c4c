"""Exception hierarchy shared across the package."""


class DirMHError(Exception):
    """Base class for all errors raised by dirmh."""


class InvalidGradient(DirMHError, ValueError):
    pass


class DegenerateDirection(DirMHError, ValueError):
    pass


class OracleFailure(DirMHError, ArithmeticError):
    pass


class InvalidCovariance(DirMHError, ValueError):
    pass


class InvalidStart(DirMHError, ValueError):
    pass


class InvalidBatchIndex(DirMHError, ValueError):
    pass


class ConstantSeries(DirMHError, ValueError):
    pass


class InsufficientData(DirMHError, ValueError):
    pass


class SingularEstimate(DirMHError, ArithmeticError):
    pass


class ConfigError(DirMHError, ValueError):
    """Invalid experiment configuration; ``path`` locates the offending field."""

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(f"{path} {message}")


class IoError(DirMHError, OSError):
    pass


class ExperimentFailed(DirMHError, RuntimeError):
    """One or more (kernel, seed) runs failed; the others were still written."""

    def __init__(self, failures):
        self.failures = failures
        lines = [f"{label} seed={seed}: {msg}" for label, seed, msg in failures]
        super().__init__("; ".join(lines))
