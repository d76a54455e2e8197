"""Exception hierarchy shared across the package."""


class FieldsenseError(Exception):
    """Base class for all errors raised by this package."""


class MalformedUrlError(FieldsenseError):
    """A page URL is not a syntactically valid absolute URL."""


class EmptyCorpusError(FieldsenseError):
    """Vocabulary construction was asked to run over an empty corpus."""


class EmptyTrainingSetError(FieldsenseError):
    """Forest training received no rows."""


class VectorWidthError(FieldsenseError):
    """Feature vectors disagree in width, or disagree with a model."""


class UnknownClassError(FieldsenseError):
    """A training row's class is not in the declared class list."""


class ModelFormatError(FieldsenseError):
    """A model file failed schema validation or version checks."""


class RulesError(FieldsenseError):
    """A rules file failed to parse or validate."""


class DatasetError(FieldsenseError):
    """A dataset file is malformed or an operation precondition failed."""
