"""Exception hierarchy for the ruin toolkit."""


class CevRuinError(Exception):
    """Base class for all toolkit errors."""


class DomainError(CevRuinError, ValueError):
    """Argument lies outside the domain of an operation."""


class UnsupportedCaseError(CevRuinError, ValueError):
    """Valid request that the implementation does not cover."""


class OutputPathError(CevRuinError, OSError):
    """Result file could not be written or read."""

    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")
