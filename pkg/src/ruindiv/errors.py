"""Exception hierarchy shared by the solvers and the command line."""


class RuinDivError(Exception):
    """Base class for all package errors."""


class DomainError(RuinDivError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class NumericalError(RuinDivError, ArithmeticError):
    """A numerical routine failed to meet its accuracy contract."""


class UnsupportedModelError(RuinDivError, NotImplementedError):
    """The requested operation is not available for this model."""


class InfeasibleError(RuinDivError):
    """The constraint level lies below the do-nothing floor."""


class ConfigError(RuinDivError, ValueError):
    """A run configuration failed validation.

    ``problems`` holds one ``(field, message)`` pair per failing field.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        text = "; ".join(f"{field}: {msg}" for field, msg in self.problems)
        super().__init__(text or "invalid configuration")
