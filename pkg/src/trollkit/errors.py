"""Exception types shared across the package."""


class TrollkitError(Exception):
    """Base class for every error raised by this package."""


class MalformedRowError(TrollkitError):
    """A corpus row/line could not be parsed."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class MissingColumnError(TrollkitError):
    """A required header column is absent from a CSV corpus."""


class EmptyCorpusError(TrollkitError):
    """An operation that needs at least one document received none."""


class DimensionMismatchError(TrollkitError):
    """Vector or block dimensions do not agree."""


class EmptyMinorityError(TrollkitError):
    """Oversampling was asked to synthesize from an empty minority class."""


class SingleClassError(TrollkitError):
    """Training data contains only one class label."""


class FingerprintMismatchError(TrollkitError):
    """A model was paired with a feature space it was not trained against."""


class LengthMismatchError(TrollkitError):
    """Paired sequences have different lengths."""


class EmptyInputError(TrollkitError):
    """A non-empty sequence was required."""


class EmptySetError(TrollkitError):
    """Impurity of an empty sample set is undefined."""


class ConstantVectorError(TrollkitError):
    """Correlation of a constant vector is undefined."""


class VersionMismatchError(TrollkitError):
    """An artifact file was written by an incompatible format version."""


class CorruptFileError(TrollkitError):
    """An artifact file is truncated, unparsable, or fails its content hash."""
