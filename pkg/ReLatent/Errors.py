from typing import Optional

__all__ = ['ReLatentError', 'KBParseError', 'UnknownNameError', 'ArityError', 'DuplicateEntityError',
           'FactValueError', 'UnknownPredicateError', 'DepthMismatchError', 'ClusteringError',
           'UndefinedEntropyError', 'ConfigError', 'UnknownEntityError']


class ReLatentError(Exception):
    """
    Base class of all errors raised by ReLatent.
    """


class KBParseError(ReLatentError, ValueError):
    """
    Raised when a schema or fact text cannot be parsed or does not type-check.
    The position of the offending statement is kept so the CLI can report it.
    """
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f'line {line}, column {column}: {message}'
        super().__init__(message)


class UnknownNameError(KBParseError):
    """
    A statement references an undeclared type, predicate or entity.
    """


class ArityError(KBParseError):
    """
    A fact has a different number of arguments than its declaration.
    """


class DuplicateEntityError(KBParseError):
    """
    An entity is declared twice with different types.
    """


class FactValueError(KBParseError):
    """
    A fact carries an invalid value (non-finite number, conflicting values or labels).
    """


class UnknownPredicateError(ReLatentError, KeyError):
    """
    A predicate is neither declared in the schema nor registered as a latent predicate.
    """
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ''


class DepthMismatchError(ReLatentError, ValueError):
    """
    Neighbourhood trees of different depths were compared with each other.
    """


class ClusteringError(ReLatentError, ValueError):
    """
    Invalid input for matrix assembly, clustering or clustering comparison.
    """


class UndefinedEntropyError(ReLatentError, ValueError):
    """
    Label entropy is undefined because no grounding touches a labeled entity.
    """


class ConfigError(ReLatentError, ValueError):
    """
    Invalid run configuration, interpretation file or generator settings.
    """


class UnknownEntityError(ReLatentError, KeyError):
    """
    An entity id does not occur in the knowledge base.
    """
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ''
