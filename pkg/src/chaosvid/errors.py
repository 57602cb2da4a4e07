class ChaosVidError(Exception):
    """Base class for every error raised by chaosvid."""


class DomainError(ChaosVidError, ValueError):
    """A map parameter or state lies outside its valid domain."""


class KeyFormatError(ChaosVidError, ValueError):
    """A key string could not be decoded."""


class FormatError(ChaosVidError, ValueError):
    """Malformed image, raw stream or container data."""


class HeaderMismatchError(FormatError):
    """Container header disagrees with the decryption context."""
