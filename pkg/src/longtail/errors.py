"""Exception hierarchy shared across the package."""


class LongtailError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(LongtailError):
    """Malformed input text (label file, manifest JSON, detections JSONL)."""


class ValidationError(LongtailError):
    """Structurally well-formed input that violates a data invariant."""


class ConfigurationError(LongtailError):
    """An operation was invoked with unusable parameters."""


class EmptyDatasetError(LongtailError):
    """An operation that needs at least one annotated instance got none."""


class ShortfallError(ConfigurationError):
    """A balancing target exceeds the available synthetic pool."""

    def __init__(self, class_name: str, requested: int, available: int):
        self.class_name = class_name
        self.requested = requested
        self.available = available
        self.deficit = requested - available
        super().__init__(
            f"class '{class_name}': requested {requested} synthetic images "
            f"but only {available} available (deficit {self.deficit})"
        )


class NumericalError(LongtailError):
    """A numerical routine left its domain of validity (e.g. an eigenvalue
    far below zero where a PSD matrix was required)."""
