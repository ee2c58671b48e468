"""Exception hierarchy shared across the toolkit."""


class TaxoforgeError(Exception):
    """Base class for all toolkit errors."""


class InvalidLabel(TaxoforgeError):
    """A label is empty (or whitespace-only) after normalization."""


class MissingTerm(TaxoforgeError):
    """An operation referenced a term id that is not in the graph."""


class DuplicateSeedEntry(TaxoforgeError):
    """A seed file contains a repeated label or knowledge-base id."""


class InvalidQid(TaxoforgeError):
    """An entity id does not match the ``Q[0-9]+`` pattern."""


class InvalidClustering(TaxoforgeError):
    """Seed genericity clusters are not a contiguous range starting at 0."""


class InvalidArgument(TaxoforgeError):
    """A parameter is outside its documented range."""


class DimensionError(TaxoforgeError):
    """Vectors of different dimensions were combined."""


class DegenerateVector(TaxoforgeError):
    """An all-zero vector has no direction, so cosine is undefined."""


class ProviderError(TaxoforgeError):
    """An embedding provider failed; callers may retry."""


class ParseError(TaxoforgeError):
    """A source file is malformed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class FetchError(TaxoforgeError):
    """A remote entity fetch failed after retries."""


class EntityNotFound(TaxoforgeError):
    """The remote knowledge base has no entity for the requested id."""


class MissingTermList(TaxoforgeError):
    """A list-constrained prompt was requested without a term list."""


class MalformedResponse(TaxoforgeError):
    """A model answer could not be parsed as a single CSV line."""


class ClientError(TaxoforgeError):
    """A chat-completion call failed after the retry budget."""


class ReplayMissingError(ClientError):
    """Replay mode has no recording for an issued request."""


class InsufficientAlternatives(TaxoforgeError):
    """Ranking needs at least two alternatives."""


class InvalidMatrix(TaxoforgeError):
    """A decision matrix contains non-finite values."""


class UndefinedAlpha(TaxoforgeError):
    """No unit has two or more ratings, so agreement is undefined."""


class UnknownRater(TaxoforgeError):
    """A rater id does not appear in the annotation table."""


class ConfigError(TaxoforgeError):
    """A run configuration file is invalid; carries path and key."""

    def __init__(self, message: str, path: str | None = None, key: str | None = None):
        detail = message
        if key is not None:
            detail = f"{key}: {detail}"
        if path is not None:
            detail = f"{path}: {detail}"
        super().__init__(detail)
        self.path = path
        self.key = key
