"""Compile workflows into single-statement analytical SQL (CTE chain).

Three dialects: `ansi` (portable), `duckdb` (native median / sample
stddev names), and `sqlite` (no WITHIN GROUP, no TIMESTAMP literals;
median/variance rely on harness-registered functions of the same names).
Output is deterministic: identical inputs compile to identical bytes.
All user data flows through quote_literal; identifiers through
quote_ident.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InvalidIdentifier, UnsupportedInDialect
from .spec_model import ComputedField
from .table_store import TEMPORAL, format_number, format_temporal
from .workflow import FilterClause, Measure, Workflow

DIALECTS = ("ansi", "duckdb", "sqlite")

_BARE_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class SqlQuery:
    dialect: str
    text: str
    output_fields: tuple[str, ...]

    def to_json(self) -> dict:
        return {"dialect": self.dialect, "sql": self.text, "output_fields": list(self.output_fields)}


def quote_ident(name: str) -> str:
    if not name:
        raise InvalidIdentifier("empty identifier")
    if "\x00" in name:
        raise InvalidIdentifier("identifier contains NUL")
    return '"' + name.replace('"', '""') + '"'


def quote_literal(value, kind: str | None = None, dialect: str = "ansi") -> str:
    """Scalar -> SQL literal. Temporal numbers render as TIMESTAMP
    literals except under sqlite, where temporal columns hold epoch millis."""
    if value is None:
        return "NULL"
    if isinstance(value, str):
        if "\x00" in value:
            raise InvalidIdentifier("literal contains NUL")
        return "'" + value.replace("'", "''") + "'"
    if kind == TEMPORAL:
        millis = int(value)
        if dialect == "sqlite":
            return format_number(float(millis))
        stamp = format_temporal(millis)
        if "T" in stamp:
            stamp = stamp.replace("T", " ")
        else:
            stamp += " 00:00:00"
        return f"TIMESTAMP '{stamp}'"
    return format_number(float(value))


def _check_dialect(dialect: str):
    if dialect not in DIALECTS:
        raise UnsupportedInDialect(f"unknown dialect {dialect!r}")


def _aggregate_sql(measure: Measure, dialect: str) -> str:
    ident = quote_ident(measure.fid)
    agg = measure.aggregation
    if agg == "sum":
        expr = f"SUM({ident})"
    elif agg == "mean":
        expr = f"AVG({ident})"
    elif agg == "count":
        expr = "COUNT(*)"  # counts rows, matching the engine
    elif agg == "min":
        expr = f"MIN({ident})"
    elif agg == "max":
        expr = f"MAX({ident})"
    elif agg == "count_distinct":
        expr = f"COUNT(DISTINCT {ident})"
    elif agg == "median":
        if dialect == "ansi":
            expr = f"PERCENTILE_CONT(0.5) WITHIN GROUP (ORDER BY {ident})"
        else:
            expr = f"MEDIAN({ident})"
    elif agg == "variance":
        expr = f"VARIANCE({ident})" if dialect == "duckdb" else f"VAR_SAMP({ident})"
    elif agg == "stddev":
        expr = f"STDDEV({ident})" if dialect == "duckdb" else f"STDDEV_SAMP({ident})"
    else:
        raise UnsupportedInDialect(f"unknown aggregation {agg!r}")
    return f"{expr} AS {quote_ident(measure.out_fid)}"


def compile_transform_sql(computed: ComputedField, dialect: str = "ansi") -> str:
    """SQL expression (with alias) for one computed field."""
    _check_dialect(dialect)
    src = quote_ident(computed.source_fid)
    out = quote_ident(computed.out_fid)
    if computed.kind in ("log2", "log10"):
        base = "LN(2)" if computed.kind == "log2" else "LN(10)"
        return f"CASE WHEN {src} > 0 THEN LN({src})/{base} END AS {out}"
    k = computed.k
    lo = f"MIN({src}) OVER ()"
    width = f"(MAX({src}) OVER () - MIN({src}) OVER ()) / {k}"
    return (
        f"CASE WHEN {src} IS NULL THEN NULL "
        f"WHEN MAX({src}) OVER () = MIN({src}) OVER () THEN {lo} "
        f"ELSE {lo} + LEAST(FLOOR(({src} - {lo}) / ({width})), {k - 1}) * ({width}) END AS {out}"
    )


def _filter_sql(clause: FilterClause, dialect: str) -> str:
    ident = quote_ident(clause.fid)
    if clause.one_of is not None:
        values = list(clause.one_of)
        has_null = any(v is None for v in values)
        present = [v for v in values if v is not None]
        parts = []
        if present:
            rendered = ", ".join(quote_literal(v, clause.kind, dialect) for v in present)
            parts.append(f"{ident} IN ({rendered})")
        if has_null:
            parts.append(f"{ident} IS NULL")
        if len(parts) == 2:
            return f"({parts[0]} OR {parts[1]})"
        return parts[0]
    lo, hi = clause.range
    return (
        f"{ident} BETWEEN {quote_literal(lo, clause.kind, dialect)}"
        f" AND {quote_literal(hi, clause.kind, dialect)}"
    )


def compile_sql(workflow: Workflow, table: str, dialect: str = "ansi") -> SqlQuery:
    """Workflow -> one SELECT statement (CTE chain, no trailing semicolon)."""
    _check_dialect(dialect)
    if not _BARE_IDENT.match(table or ""):
        raise InvalidIdentifier(f"table must be a bare identifier, got {table!r}")

    ctes = []
    source = quote_ident(table)
    if workflow.filter is not None and workflow.filter.filters:
        where = " AND ".join(_filter_sql(c, dialect) for c in workflow.filter.filters)
        ctes.append(f"filtered AS (SELECT * FROM {source} WHERE {where})")
        source = "filtered"
    if workflow.transform is not None and workflow.transform.computed:
        exprs = ", ".join(compile_transform_sql(c, dialect) for c in workflow.transform.computed)
        ctes.append(f"transformed AS (SELECT *, {exprs} FROM {source})")
        source = "transformed"

    view = workflow.view
    if not (view.group_by or view.measures or view.fids):
        raise UnsupportedInDialect("a view selecting no columns has no SQL form")
    if view.mode == "aggregate":
        select_parts = [quote_ident(fid) for fid in view.group_by]
        select_parts += [_aggregate_sql(m, dialect) for m in view.measures]
        text = f"SELECT {', '.join(select_parts)} FROM {source}"
        if view.group_by:
            text += " GROUP BY " + ", ".join(quote_ident(fid) for fid in view.group_by)
        output = view.group_by + tuple(m.out_fid for m in view.measures)
    else:
        select_parts = [quote_ident(fid) for fid in view.fids]
        text = f"SELECT {', '.join(select_parts)} FROM {source}"
        output = view.fids

    if workflow.sort is not None:
        direction = "ASC NULLS FIRST" if workflow.sort.direction == "asc" else "DESC NULLS LAST"
        order = [f"{quote_ident(workflow.sort.by)} {direction}"]
        if view.mode == "aggregate":
            # deterministic tie-break across engines: the rest of the key tuple
            order += [
                f"{quote_ident(fid)} ASC NULLS FIRST"
                for fid in view.group_by
                if fid != workflow.sort.by
            ]
        text += " ORDER BY " + ", ".join(order)

    if ctes:
        text = "WITH " + ", ".join(ctes) + " " + text
    return SqlQuery(dialect=dialect, text=text, output_fields=output)
