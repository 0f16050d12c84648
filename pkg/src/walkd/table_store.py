"""Columnar dataset ingestion and field-type inference.

Datasets are immutable after construction. Each column holds exactly one
storage kind: float64, utf8, or temporal (epoch milliseconds, int).
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import EmptyInput, EncodingError, NestedValue, RaggedRow

FLOAT64 = "float64"
UTF8 = "utf8"
TEMPORAL = "temporal"

# Integer sums stay exact in float64 up to 2^53.
EXACT_INT_LIMIT = 2**53

# Columns of integral numbers with at most this many distinct values are
# treated as ordinal dimensions (keeps year-like columns draggable).
ORDINAL_DISTINCT_MAX = 20

_DATE_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_DATETIME_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})Z?$")
_NON_FINITE = {"nan", "inf", "-inf", "+inf", "infinity", "-infinity", "+infinity"}

_MS_PER_DAY = 86_400_000


def parse_temporal(text: str) -> int | None:
    """Parse ISO-8601 date / date-time into epoch millis, None if not one."""
    m = _DATE_RE.match(text)
    if m:
        parts = (int(m.group(1)), int(m.group(2)), int(m.group(3)), 0, 0, 0)
    else:
        m = _DATETIME_RE.match(text)
        if not m:
            return None
        parts = tuple(int(g) for g in m.groups())
    try:
        dt = datetime(*parts, tzinfo=timezone.utc)
    except ValueError:
        return None
    return int(dt.timestamp() * 1000)


def format_temporal(millis: int) -> str:
    """Epoch millis back to ISO-8601; midnight values print as bare dates."""
    dt = datetime.fromtimestamp(millis / 1000, tz=timezone.utc)
    if millis % _MS_PER_DAY == 0:
        return dt.strftime("%Y-%m-%d")
    return dt.strftime("%Y-%m-%dT%H:%M:%S")


def parse_number(text: str) -> float | None:
    """Parse a numeric cell; rejects non-finite spellings."""
    # float() tolerates "1_0"-style separators; CSV cells should not.
    if "_" in text or text.strip().lower() in _NON_FINITE:
        return None
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def format_number(value: float) -> str:
    """Shortest decimal form; integral values print without a fraction."""
    if value == int(value) and abs(value) <= EXACT_INT_LIMIT:
        return str(int(value))
    return repr(float(value))


def format_cell(kind: str, value) -> str:
    """Canonical text form of one cell (nulls print as empty string)."""
    if value is None:
        return ""
    if kind == FLOAT64:
        return format_number(value)
    if kind == TEMPORAL:
        return format_temporal(value)
    return value


@dataclass(frozen=True)
class Column:
    """One typed column: values hold None at null positions."""

    name: str
    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in (FLOAT64, UTF8, TEMPORAL):
            raise ValueError(f"unknown storage kind {self.kind!r}")

    @property
    def null_mask(self) -> tuple[bool, ...]:
        return tuple(v is None for v in self.values)

    def non_null(self) -> list:
        return [v for v in self.values if v is not None]


@dataclass(frozen=True)
class Dataset:
    """Immutable named collection of equal-length columns."""

    id: str
    name: str
    columns: tuple[Column, ...]
    row_count: int

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        for c in self.columns:
            if len(c.values) != self.row_count:
                raise ValueError(f"column {c.name!r} length != row_count")

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class FieldMeta:
    """A column's identity plus its semantic and analytic classification."""

    fid: str
    name: str
    semantic_type: str  # nominal | ordinal | quantitative | temporal
    analytic_type: str  # dimension | measure
    distinct_count: int
    min: float | None = None
    max: float | None = None

    def to_json(self) -> dict:
        doc = {
            "fid": self.fid,
            "name": self.name,
            "semantic_type": self.semantic_type,
            "analytic_type": self.analytic_type,
            "distinct_count": self.distinct_count,
        }
        if self.min is not None:
            doc["min"] = self.min
        if self.max is not None:
            doc["max"] = self.max
        return doc


def sanitize_fid(name: str) -> str:
    fid = "".join(ch if ch.isalnum() else "_" for ch in name.lower())
    return fid or "field"


def _unique_names(names: list[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for name in names:
        candidate = name
        n = 2
        while candidate in seen:
            candidate = f"{name}_{n}"
            n += 1
        seen.add(candidate)
        out.append(candidate)
    return out


def _infer_column(name: str, cells: list[str | None]) -> Column:
    """Pick the storage kind by scanning every non-null cell."""
    present = [c for c in cells if c is not None]
    numbers = [parse_number(c) for c in present]
    if all(n is not None for n in numbers):
        values = iter(numbers)
        return Column(name, FLOAT64, tuple(None if c is None else next(values) for c in cells))
    stamps = [parse_temporal(c) for c in present]
    if all(s is not None for s in stamps):
        values = iter(stamps)
        return Column(name, TEMPORAL, tuple(None if c is None else next(values) for c in cells))
    return Column(name, UTF8, tuple(cells))


def load_csv(
    data: bytes,
    *,
    name: str = "dataset",
    dataset_id: str | None = None,
    delimiter: str = ",",
    has_header: bool = True,
) -> Dataset:
    """Parse RFC 4180 CSV bytes into a typed Dataset.

    Empty cells become nulls. Storage kinds are chosen per column: all
    numeric-parseable -> float64, else all ISO-date-parseable -> temporal,
    else utf8.
    """
    if not data:
        raise EmptyInput("no input bytes")
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"input is not valid UTF-8: {exc}") from None

    reader = csv.reader(io.StringIO(text, newline=""), delimiter=delimiter)
    try:
        first = next(reader)
    except StopIteration:
        raise EmptyInput("no rows") from None
    if len(first) == 0 or all(cell == "" for cell in first):
        raise EmptyInput("zero columns")

    if has_header:
        header = _unique_names(first)
        rows: list[list[str]] = []
    else:
        header = [f"c{i + 1}" for i in range(len(first))]
        rows = [first]
    width = len(header)

    for row in reader:
        if not row:
            continue  # blank trailing line
        if len(row) != width:
            raise RaggedRow(reader.line_num, width, len(row))
        rows.append(row)

    grid = [[cell if cell != "" else None for cell in row] for row in rows]
    columns = tuple(
        _infer_column(header[i], [row[i] for row in grid]) for i in range(width)
    )
    return Dataset(
        id=dataset_id or sanitize_fid(name),
        name=name,
        columns=columns,
        row_count=len(rows),
    )


def _json_cell(key: str, value):
    """Normalize one JSON scalar; non-finite numbers degrade to null."""
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, str):
        return value
    raise NestedValue(f"key {key!r} holds a non-scalar value")


def load_json_rows(
    rows: list[dict],
    *,
    name: str = "dataset",
    dataset_id: str | None = None,
) -> Dataset:
    """Build a Dataset from a list of flat JSON objects (union of keys)."""
    keys: list[str] = []
    seen: set[str] = set()
    for row in rows:
        if not isinstance(row, dict):
            raise NestedValue("rows must be objects")
        for key in row:
            if key not in seen:
                seen.add(key)
                keys.append(key)
    if not keys:
        raise EmptyInput("zero columns")

    columns = []
    for key in keys:
        cells = [_json_cell(key, row.get(key)) for row in rows]
        present = [c for c in cells if c is not None]
        if present and all(isinstance(c, float) for c in present):
            columns.append(Column(key, FLOAT64, tuple(cells)))
            continue
        if present and all(
            isinstance(c, str) and parse_temporal(c) is not None for c in present
        ):
            columns.append(
                Column(key, TEMPORAL, tuple(None if c is None else parse_temporal(c) for c in cells))
            )
            continue
        text_cells = tuple(
            None if c is None else (format_number(c) if isinstance(c, float) else c)
            for c in cells
        )
        columns.append(Column(key, UTF8, text_cells))
    return Dataset(
        id=dataset_id or sanitize_fid(name),
        name=name,
        columns=tuple(columns),
        row_count=len(rows),
    )


def infer_fields(dataset: Dataset) -> list[FieldMeta]:
    """One FieldMeta per column; deterministic classification.

    Rules, in order: integral numbers with few distinct values are ordinal
    dimensions; other numbers are quantitative measures; temporal columns
    are temporal dimensions; everything else is a nominal dimension.
    """
    fids = _unique_names([sanitize_fid(c.name) for c in dataset.columns])
    fields = []
    for fid, col in zip(fids, dataset.columns):
        present = col.non_null()
        distinct = len(set(present))
        if col.kind == FLOAT64:
            integral = all(v == int(v) and abs(v) <= EXACT_INT_LIMIT for v in present)
            if integral and distinct <= ORDINAL_DISTINCT_MAX:
                fields.append(FieldMeta(fid, col.name, "ordinal", "dimension", distinct))
            else:
                fields.append(
                    FieldMeta(
                        fid,
                        col.name,
                        "quantitative",
                        "measure",
                        distinct,
                        min=min(present) if present else None,
                        max=max(present) if present else None,
                    )
                )
        elif col.kind == TEMPORAL:
            fields.append(
                FieldMeta(
                    fid,
                    col.name,
                    "temporal",
                    "dimension",
                    distinct,
                    min=min(present) if present else None,
                    max=max(present) if present else None,
                )
            )
        else:
            fields.append(FieldMeta(fid, col.name, "nominal", "dimension", distinct))
    return fields


@dataclass
class FieldIndex:
    """Lookup helper pairing a Dataset with its inferred fields."""

    dataset: Dataset
    fields: list[FieldMeta] = field(default_factory=list)

    def __post_init__(self):
        if not self.fields:
            self.fields = infer_fields(self.dataset)
        self._by_fid = {f.fid: f for f in self.fields}
        self._col_by_fid = {
            f.fid: c for f, c in zip(self.fields, self.dataset.columns)
        }

    def field(self, fid: str) -> FieldMeta | None:
        return self._by_fid.get(fid)

    def column(self, fid: str) -> Column | None:
        return self._col_by_fid.get(fid)
