"""Exception hierarchy shared by all ids_lab modules."""


class IdsLabError(Exception):
    """Base class for runtime failures surfaced by the CLI with exit code 3."""


class NonMonotoneSequence(IdsLabError):
    pass


class NegativePotential(IdsLabError):
    pass


class WindowTooSmall(IdsLabError):
    """The realization has not materialized every group element that is needed."""


class OracleCapExceeded(IdsLabError):
    pass


class PivotBreakdown(IdsLabError):
    """A pivot of the shifted factorization fell below the breakdown tolerance."""

    def __init__(self, lam, pivot, index):
        super().__init__(f"pivot {pivot:.3e} at step {index} for lambda={lam!r}")
        self.lam = lam
        self.pivot = pivot
        self.index = index


class NotPeriodic(IdsLabError):
    pass


class InsufficientData(IdsLabError):
    pass


class UnsupportedModel(IdsLabError):
    pass


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is a dotted path into the JSON document."""

    def __init__(self, field, message, line=None):
        where = field if line is None else f"{field} (line {line})"
        super().__init__(f"{where}: {message}")
        self.field = field
        self.line = line
