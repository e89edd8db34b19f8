"""Exception hierarchy shared across the toolkit."""


class SpeakerkitError(Exception):
    """Base class for all toolkit errors."""


class MalformedContainer(SpeakerkitError):
    """WAV container is not a valid RIFF/WAVE file."""


class UnsupportedEncoding(SpeakerkitError):
    """WAV codec other than PCM16 / IEEE float32."""


class OutOfRange(SpeakerkitError):
    """Requested slice starts past the end of the buffer."""


class TooShort(SpeakerkitError):
    """Audio too short for embedding extraction."""


class BackendMismatch(SpeakerkitError):
    """Embeddings from different backends cannot be compared."""


class EmptyInput(SpeakerkitError):
    """Operation requires a non-empty collection."""


class DegenerateMean(SpeakerkitError):
    """Mean of embeddings cancelled to (near) zero."""


class EmptySet(SpeakerkitError):
    """Closed-set identification against an empty speaker set."""


class LengthMismatch(SpeakerkitError):
    """Parallel lists have different lengths."""


class SchemaViolation(SpeakerkitError):
    """Document JSON does not match the result schema."""


class IndexOutOfRange(SpeakerkitError):
    """Segment index outside the document."""


class RevisionConflict(SpeakerkitError):
    """Optimistic-concurrency check failed on edit."""


class ParseError(SpeakerkitError):
    """RTTM line could not be parsed."""

    def __init__(self, message, line_no=None):
        super().__init__(message)
        self.line_no = line_no


class MixedFileIds(SpeakerkitError):
    """DER scoring got records from more than one file."""


class UnknownSetup(SpeakerkitError):
    """Submission referenced a setup id not in the catalog."""


class ConfigError(SpeakerkitError):
    """Bad configuration file (missing keys, duplicate setup ids)."""
