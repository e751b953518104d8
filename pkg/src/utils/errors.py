"""
Exception hierarchy shared by ingestion, indexing, evaluation and the CLI.

The CLI maps ConfigError to exit code 1, DataError (and FileNotFoundError)
to exit code 2; anything else is an internal error.
"""

from typing import Optional

__all__ = [
    'RetrievalEngineError',
    'ConfigError',
    'DataError',
    'SchemaError',
    'LiteralSyntaxError',
    'EmptyVocabulary',
    'MissingPost',
    'MissingLanguageIndex',
    'MissingPrediction',
    'EmptyReport',
    'ModelFormatError',
]


class RetrievalEngineError(Exception):
    """Base class for all errors raised by the engine"""


class ConfigError(RetrievalEngineError):
    """Invalid configuration or command-line usage"""


class DataError(RetrievalEngineError, ValueError):
    """Input data could not be used"""


class SchemaError(DataError):
    """A JSON document is missing a required key or has the wrong shape"""

    def __init__(self, key_path: str, message: Optional[str] = None):
        self.key_path = key_path
        super().__init__(message or f"Missing or invalid key: {key_path}")


class LiteralSyntaxError(DataError):
    """A literal expression could not be parsed"""

    def __init__(self, position: int, expected: str, text: Optional[str] = None):
        self.position = position
        self.expected = expected
        self.text = text
        super().__init__(f"Literal syntax error at position {position}: {expected}")


class EmptyVocabulary(DataError):
    """No document in the fitting corpus produced a token"""


class MissingPost(DataError):
    def __init__(self, post_id: int):
        self.post_id = post_id
        super().__init__(f"Post {post_id} is listed in the task but was not loaded")


class MissingLanguageIndex(DataError):
    def __init__(self, language: str):
        self.language = language
        super().__init__(f"No retrieval index built for language '{language}'")


class MissingPrediction(DataError):
    def __init__(self, post_id: int):
        self.post_id = post_id
        super().__init__(f"No prediction for gold post {post_id}")


class EmptyReport(DataError):
    """Aggregation was asked to average zero languages"""


class ModelFormatError(DataError):
    """A persisted model or index has an unknown version or layout"""
