"""Exceptions and issue codes shared across the package."""
from __future__ import annotations


class BatchLensError(Exception):
    """Base class for all batchlens errors."""

    code = "ERROR"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class FatalIngestError(BatchLensError):
    """Bundle or table cannot be read at all; nothing usable was produced."""

    code = "FATAL_INGEST"


class CorruptBundleError(BatchLensError):
    """Cross-table consistency is too broken to build a store."""

    code = "CORRUPT_BUNDLE"


class NotFoundError(BatchLensError):
    """Lookup by identifier failed."""

    code = "NOT_FOUND"


class ZeroDenominatorError(BatchLensError):
    """A ratio over an empty population was requested."""

    code = "ZERO_DENOMINATOR"


class NotApplicableError(BatchLensError):
    """Operation preconditions exclude this subject (e.g. unfinished job)."""

    code = "NOT_APPLICABLE"


# Row-level issue codes used in ValidationReport entries.
MISSING_FIELD = "MISSING_FIELD"
BAD_FIELD = "BAD_FIELD"
BAD_ROW = "BAD_ROW"
DUPLICATE_KEY = "DUPLICATE_KEY"
NEGATIVE_DURATION = "NEGATIVE_DURATION"
CLAMPED = "CLAMPED"
UNKNOWN_STATUS = "UNKNOWN_STATUS"
BAD_DEPENDENCIES = "BAD_DEPENDENCIES"
DANGLING_PARENT = "DANGLING_PARENT"
MANIFEST_DRIFT = "MANIFEST_DRIFT"
EMPTY_TABLE = "EMPTY_TABLE"
MISSING_TABLE = "MISSING_TABLE"
