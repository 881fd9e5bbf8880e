"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ParameterError(DomainError):
    """Invalid engine parameters. ``fields`` names the offending inputs."""

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = tuple(fields)


class UndefinedQuantityError(ArithmeticError):
    """A physically undefined quantity was requested (e.g. efficiency at zero heat)."""


class UndefinedEfficiencyError(UndefinedQuantityError):
    pass


class MomentsUndefinedError(UndefinedQuantityError):
    pass


class NoExtremumError(UndefinedQuantityError):
    pass


class ScanSpecError(ValueError):
    """Invalid scan specification; ``problems`` lists every offending field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid scan spec: " + "; ".join(self.problems))
