"""Exception types raised by wrlda."""


class WRLDAError(Exception):
    """Base class for all package errors."""


class ConfigError(WRLDAError, ValueError):
    """Invalid fit or CLI configuration."""


class DataError(WRLDAError, ValueError):
    """Malformed or inconsistent input data."""


class CorpusFormatError(DataError):
    """A corpus, graph, or vocabulary file failed to parse."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class NumericalError(WRLDAError, ArithmeticError):
    """A non-finite value appeared during inference."""

    def __init__(self, message, doc=None, iteration=None):
        parts = [message]
        if doc is not None:
            parts.append(f"document {doc}")
        if iteration is not None:
            parts.append(f"EM iteration {iteration}")
        super().__init__(" / ".join(parts))
        self.message = message
        self.doc = doc
        self.iteration = iteration
