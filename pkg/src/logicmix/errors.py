"""Exception types raised across the package."""


class LogicMixError(Exception):
    """Base class for all errors raised by logicmix."""


class ContractViolation(LogicMixError, ValueError):
    """An argument broke a documented precondition."""


class DimensionError(LogicMixError, ValueError):
    """Shapes or lengths of the inputs do not agree."""


class EnumerationTooLarge(LogicMixError, ValueError):
    pass


class InsufficientDataset(LogicMixError, ValueError):
    """The dataset is too small to draw the requested companions."""


class ParseError(LogicMixError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class IngestionError(LogicMixError, ValueError):
    pass


class HarnessError(LogicMixError, RuntimeError):
    """The throughput harness failed (e.g. a worker stalled)."""
