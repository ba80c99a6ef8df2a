"""Exception hierarchy shared across the package."""


class LacdError(Exception):
    """Base class for all package errors."""


class DimensionError(LacdError, ValueError):
    pass


class InvalidGraphError(LacdError, ValueError):
    pass


class ConfigError(LacdError, ValueError):
    pass


class NumericalError(LacdError, ArithmeticError):
    pass


class SeparationError(NumericalError):
    """Logistic MLE diverges; ``beta`` holds the capped estimate."""

    def __init__(self, message, beta=None, iterations=0):
        super().__init__(message)
        self.beta = beta
        self.iterations = iterations


class EmptyGroupError(NumericalError):
    def __init__(self, group):
        super().__init__(f"group {group} has (near) zero posterior mass")
        self.group = group


class DegenerateDegreeError(NumericalError):
    def __init__(self, group):
        super().__init__(f"group {group} carries zero total degree")
        self.group = group


class FitError(LacdError, RuntimeError):
    def __init__(self, message, causes=()):
        super().__init__(message)
        self.causes = list(causes)


class SelectError(LacdError, RuntimeError):
    pass


class UnsupportedError(LacdError, ValueError):
    pass


class IngestError(LacdError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class JoinError(LacdError, ValueError):
    def __init__(self, missing, extra=()):
        self.missing = list(missing)
        self.extra = list(extra)
        parts = []
        if self.missing:
            parts.append(f"missing covariates for nodes: {self.missing}")
        if self.extra:
            parts.append(f"covariates for unknown nodes: {self.extra}")
        super().__init__("; ".join(parts))
