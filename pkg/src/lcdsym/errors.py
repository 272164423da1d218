"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`ConfigError` -> 2,
:class:`NumericalError` -> 3, :class:`CacheIntegrityError` -> 4.
"""


class LcdsymError(Exception):
    pass


class ConfigError(LcdsymError, ValueError):
    """Invalid user-facing configuration (dimensions, counts, budgets)."""


class DomainError(ConfigError):
    """Argument outside the domain of a mathematical function."""


class NumericalError(LcdsymError, ArithmeticError):
    pass


class DegenerateConfigurationError(NumericalError):
    """Two expanded samples coincide, so a gradient term is undefined."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class RankDeficiencyError(NumericalError):
    pass


class NotPositiveDefiniteError(NumericalError):
    pass


class InnovationCovarianceSingularError(NumericalError):
    pass


class NumericalConsistencyError(NumericalError):
    pass


class ModelEvaluationError(NumericalError):
    pass


class CacheIntegrityError(LcdsymError):
    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason
