"""Exception hierarchy shared across the package."""


class CapeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CapeError):
    """A parameter or configuration value is invalid."""


class DocumentError(CapeError):
    """A document record is malformed or conflicts with the store."""


class StateError(CapeError):
    """An operation was called before its prerequisites were met."""


class UnknownIdError(CapeError):
    """A term, cluster, pattern, or document id is not known."""

    def __init__(self, message: str, offenders=None):
        super().__init__(message)
        self.offenders = tuple(offenders) if offenders else ()


class DegenerateDataError(CapeError):
    """The data cannot support the requested computation (all-zero scores,
    single-class training sets, empty taxonomies, and the like)."""


class FormatError(CapeError):
    """A persisted artifact has the wrong format or version."""
