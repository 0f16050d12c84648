"""Exception types and validation violations shared across the engine."""

from __future__ import annotations

from dataclasses import dataclass


class WalkdError(Exception):
    """Base class; `code` is the machine-readable error identifier."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message


# --- ingestion ---

class EmptyInput(WalkdError):
    code = "empty_input"


class RaggedRow(WalkdError):
    code = "ragged_row"

    def __init__(self, line: int, expected: int, got: int):
        super().__init__(f"row at line {line} has {got} fields, expected {expected}")
        self.line = line
        self.expected = expected
        self.got = got


class EncodingError(WalkdError):
    code = "encoding_error"


class NestedValue(WalkdError):
    code = "nested_value"


# --- spec parsing ---

class JsonSyntax(WalkdError):
    code = "json_syntax"


class SchemaViolation(WalkdError):
    code = "schema_violation"

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class UnsupportedVersion(WalkdError):
    code = "unsupported_version"


# --- workflow derivation ---

class DerivationError(WalkdError):
    code = "derivation_error"


class FacetError(WalkdError):
    code = "facet_error"


class PivotError(WalkdError):
    code = "pivot_error"


# --- execution ---

class UnknownField(WalkdError):
    code = "unknown_field"


class TypeMismatch(WalkdError):
    code = "type_mismatch"


# --- SQL generation ---

class InvalidIdentifier(WalkdError):
    code = "invalid_identifier"


class UnsupportedInDialect(WalkdError):
    code = "unsupported_in_dialect"


# --- rendering ---

class RenderError(WalkdError):
    code = "render_error"


class InconsistentRollups(WalkdError):
    code = "inconsistent_rollups"


@dataclass(frozen=True)
class Violation:
    """A single validation finding; violations are data, not exceptions."""

    code: str
    path: str
    message: str

    def to_json(self) -> dict:
        return {"code": self.code, "path": self.path, "message": self.message}
