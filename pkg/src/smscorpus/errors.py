"""Exception types shared across the toolchain.

Every error that user input can trigger derives from CorpusError so that
callers (CLI, HTTP service, tests) can catch one base class and map it to a
structured response instead of a traceback.
"""

from __future__ import annotations


class CorpusError(Exception):
    """Base class for all expected, user-triggerable failures."""

    code = "corpus_error"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ParseError(CorpusError):
    """Raised when a submission payload does not conform to its format."""

    code = "parse_error"


class UploadRejectedError(CorpusError):
    """Verification code on an app-upload draft did not check out."""

    code = "upload_rejected"


class AuthError(CorpusError):
    """Missing or wrong admin token on a moderation endpoint."""

    code = "unauthorized"


class StoreError(CorpusError):
    code = "store_error"


class DuplicateBatchError(StoreError):
    code = "duplicate_batch"


class UnknownProfileError(StoreError):
    code = "unknown_profile"


class InvalidFilterError(StoreError):
    code = "invalid_filter"


class TerminalStateError(StoreError):
    """A batch already approved or rejected cannot be moderated again."""

    code = "terminal_state"


class MissingProfileError(StoreError):
    """Approval requires a demographic profile under the active policy."""

    code = "missing_profile"


class NotFoundError(StoreError):
    code = "not_found"


class SchemeError(CorpusError):
    """A reward scheme definition is malformed or inconsistent."""

    code = "scheme_error"


class ReleaseError(CorpusError):
    code = "release_error"


class VersionOrderError(ReleaseError):
    """Release versions must move forward and never shrink the corpus."""

    code = "version_order"


class ReleaseSchemaError(ReleaseError):
    """A release dump failed schema checks; carries the input position."""

    code = "release_schema"

    def __init__(self, detail: str, line: int | None = None, column: int | None = None):
        if line is not None:
            detail = f"{detail} (line {line}, column {column if column is not None else 0})"
        super().__init__(detail)
        self.line = line
        self.column = column


class ConfigError(CorpusError):
    code = "config_error"
