"""Exception types shared across the package."""


class SarcfuseError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SarcfuseError):
    """A dataset record could not be parsed. Carries the 1-based line number."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class LabelError(SarcfuseError):
    """A record carried a label outside {0, 1}."""


class ManifestMismatchError(SarcfuseError):
    """Actual per-split/per-label counts disagree with the manifest."""


class EmptyCorpusError(SarcfuseError):
    """An operation that needs at least one example got none."""


class VectorFormatError(SarcfuseError):
    """A pretrained-vector file line had the wrong number of fields."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ShapeError(SarcfuseError):
    """An input tensor had the wrong dimension for its branch."""


class CheckpointError(SarcfuseError):
    """Model assets could not be loaded or do not match the run config."""


class CoverageError(SarcfuseError):
    """An external-predictions file does not cover the test split exactly."""

    def __init__(self, message, missing=(), surplus=()):
        super().__init__(message)
        self.missing = list(missing)
        self.surplus = list(surplus)


class DivergenceError(SarcfuseError):
    """Training loss became non-finite."""

    def __init__(self, message, epoch=None, step=None):
        super().__init__(message)
        self.epoch = epoch
        self.step = step


class ConfigError(SarcfuseError):
    """A run config violated the schema. Carries the offending key path."""

    def __init__(self, message, key_path=None):
        if key_path is not None:
            message = f"{key_path}: {message}"
        super().__init__(message)
        self.key_path = key_path
