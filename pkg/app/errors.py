"""
Exceptions raised by the engine.

Each error carries a ``detail`` message and the ``exit_code`` the command
line returns for it, the same way an HTTP error carries a status code.
"""


class EngineError(Exception):
    exit_code = 2

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class SeriesDomainError(EngineError, ValueError):
    """A value cannot be expanded, substituted or specialised as asked."""


class SubstitutionError(SeriesDomainError):
    """The image of T -> (QT^2)^-1 is not expandable as a Q-series."""


class ContractViolation(EngineError, ValueError):
    """An operation received a weak diagonal partition that fails validation."""


class UnsupportedCurveError(EngineError, ValueError):
    """No formula or enumerator exists for the requested curve x^u y^v."""


class DomainError(EngineError, ValueError):
    """A closed-form parameter is out of range."""


class NormalizationError(EngineError, ValueError):
    """The normalising T-power does not divide the value."""


class KRConsistencyError(EngineError):
    exit_code = 1
