"""In-process workflow execution over immutable columnar datasets.

Pure functions: a workflow never mutates its dataset, so any number of
executions may run concurrently. Group keys compare by plain scalar
equality; nulls are ordinary keys and sort first ascending.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .derive import PivotPlan
from .errors import TypeMismatch, UnknownField
from .table_store import (
    FLOAT64,
    TEMPORAL,
    UTF8,
    Column,
    Dataset,
    FieldMeta,
    format_temporal,
    infer_fields,
)
from .workflow import FilterClause, Measure, Workflow

_NULLS_FIRST_KEY = {
    FLOAT64: lambda v: (v is not None, v if v is not None else 0.0),
    TEMPORAL: lambda v: (v is not None, v if v is not None else 0),
    UTF8: lambda v: (v is not None, v if v is not None else ""),
}


@dataclass(frozen=True)
class ViewColumn:
    fid: str
    kind: str
    bin_min: float | None = None
    bin_width: float | None = None

    def to_json(self) -> dict:
        doc = {"fid": self.fid, "kind": self.kind}
        if self.bin_width is not None:
            doc["bin_min"] = self.bin_min
            doc["bin_width"] = self.bin_width
        return doc


@dataclass
class ViewTable:
    """Rectangular view data; aggregate outputs have unique key tuples."""

    columns: list[ViewColumn]
    rows: list[list]

    def column_index(self, fid: str) -> int:
        for i, col in enumerate(self.columns):
            if col.fid == fid:
                return i
        raise UnknownField(f"view has no column {fid!r}")

    def to_json(self) -> dict:
        temporal = [i for i, c in enumerate(self.columns) if c.kind == TEMPORAL]
        rows = self.rows
        if temporal:
            rows = [
                [
                    format_temporal(v) if i in temporal and v is not None else v
                    for i, v in enumerate(row)
                ]
                for row in rows
            ]
        return {"fields": [c.to_json() for c in self.columns], "rows": rows}


# ---------------------------------------------------------------------------
# aggregation kernels (operate on one group's value list)
# ---------------------------------------------------------------------------


def _agg_sum(values):
    present = [v for v in values if v is not None]
    if not present:
        return None
    total = 0.0
    for v in present:
        total += v
    return total


def _agg_mean(values):
    present = [v for v in values if v is not None]
    if not present:
        return None
    return _agg_sum(present) / len(present)


def _agg_min(values):
    present = [v for v in values if v is not None]
    return min(present) if present else None


def _agg_max(values):
    present = [v for v in values if v is not None]
    return max(present) if present else None


def _agg_median(values):
    """Linear interpolation between the two middle order statistics."""
    present = sorted(v for v in values if v is not None)
    n = len(present)
    if n == 0:
        return None
    if n % 2:
        return float(present[n // 2])
    return (present[n // 2 - 1] + present[n // 2]) / 2


def _agg_variance(values):
    """Sample variance (n-1); fewer than two values yield null."""
    present = [v for v in values if v is not None]
    n = len(present)
    if n < 2:
        return None
    mean = _agg_sum(present) / n
    return sum((v - mean) ** 2 for v in present) / (n - 1)


def _agg_stddev(values):
    var = _agg_variance(values)
    return None if var is None else math.sqrt(var)


def _agg_count(values):
    return len(values)  # counts rows, including nulls


def _agg_count_distinct(values):
    return len({v for v in values if v is not None})


AGGREGATORS = {
    "sum": _agg_sum,
    "mean": _agg_mean,
    "count": _agg_count,
    "min": _agg_min,
    "max": _agg_max,
    "median": _agg_median,
    "variance": _agg_variance,
    "stddev": _agg_stddev,
    "count_distinct": _agg_count_distinct,
}


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def apply_transform(column: Column, kind: str, k: int | None = None, stats: dict | None = None) -> Column:
    """Compute a log or bin column; nulls propagate, log of <= 0 is null.

    For bin, stats carries the post-filter {min, max}; a degenerate range
    (max == min) puts every value in bin 0.
    """
    if column.kind != FLOAT64:
        raise TypeMismatch(f"transform source {column.name!r} is not quantitative")
    if kind in ("log2", "log10"):
        base = math.log(2.0) if kind == "log2" else math.log(10.0)
        values = tuple(
            math.log(v) / base if v is not None and v > 0 else None for v in column.values
        )
        return Column(column.name, FLOAT64, values)
    if kind != "bin":
        raise TypeMismatch(f"unknown transform {kind!r}")
    stats = stats or {}
    lo, hi = stats.get("min"), stats.get("max")
    if lo is None or hi is None:
        return Column(column.name, FLOAT64, tuple(None for _ in column.values))
    width = (hi - lo) / k
    out = []
    for v in column.values:
        if v is None:
            out.append(None)
        elif width == 0:
            out.append(lo)
        else:
            out.append(lo + min(math.floor((v - lo) / width), k - 1) * width)
    return Column(column.name, FLOAT64, tuple(out))


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


@dataclass
class _Frame:
    """Working table during execution: fid -> (kind, values, extras)."""

    kinds: dict = field(default_factory=dict)
    cells: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)  # fid -> dict (bin metadata)
    size: int = 0

    def require(self, fid: str):
        if fid not in self.kinds:
            raise UnknownField(f"unknown field {fid!r}")


def _apply_filters(frame: _Frame, clauses: tuple[FilterClause, ...]) -> list[int]:
    predicates = []
    for clause in clauses:
        frame.require(clause.fid)
        values = frame.cells[clause.fid]
        if clause.one_of is not None:
            allowed = set(clause.one_of)
            predicates.append((values, lambda v, s=allowed: v in s))
        else:
            if frame.kinds[clause.fid] == UTF8:
                raise TypeMismatch(f"range filter on text field {clause.fid!r}")
            lo, hi = clause.range
            predicates.append((values, lambda v, lo=lo, hi=hi: v is not None and lo <= v <= hi))
    return [
        i for i in range(frame.size) if all(pred(vals[i]) for vals, pred in predicates)
    ]


def execute(workflow: Workflow, dataset: Dataset, fields: list[FieldMeta] | None = None) -> ViewTable:
    """Run the workflow's steps in order and return the view data."""
    if fields is None:
        fields = infer_fields(dataset)
    frame = _Frame(size=dataset.row_count)
    for meta, col in zip(fields, dataset.columns):
        frame.kinds[meta.fid] = col.kind
        frame.cells[meta.fid] = list(col.values)

    if workflow.filter is not None:
        keep = _apply_filters(frame, workflow.filter.filters)
        frame.cells = {fid: [vals[i] for i in keep] for fid, vals in frame.cells.items()}
        frame.size = len(keep)

    if workflow.transform is not None:
        for cf in workflow.transform.computed:
            frame.require(cf.source_fid)
            if frame.kinds[cf.source_fid] != FLOAT64:
                raise TypeMismatch(f"transform source {cf.source_fid!r} is not quantitative")
            source = Column(cf.source_fid, FLOAT64, tuple(frame.cells[cf.source_fid]))
            if cf.kind == "bin":
                present = source.non_null()
                stats = {
                    "min": min(present) if present else None,
                    "max": max(present) if present else None,
                }
                out = apply_transform(source, "bin", cf.k, stats)
                if stats["min"] is not None:
                    width = (stats["max"] - stats["min"]) / cf.k
                    frame.extras[cf.out_fid] = {"bin_min": stats["min"], "bin_width": width}
            else:
                out = apply_transform(source, cf.kind)
            frame.kinds[cf.out_fid] = FLOAT64
            frame.cells[cf.out_fid] = list(out.values)

    view = workflow.view
    if view.mode == "aggregate":
        table = _aggregate(frame, view.group_by, view.measures)
    else:
        for fid in view.fids:
            frame.require(fid)
        columns = [ViewColumn(fid, frame.kinds[fid], **_bin_extras(frame, fid)) for fid in view.fids]
        rows = [[frame.cells[fid][i] for fid in view.fids] for i in range(frame.size)]
        table = ViewTable(columns, rows)

    if workflow.sort is not None:
        idx = table.column_index(workflow.sort.by)
        kind = table.columns[idx].kind
        key = _NULLS_FIRST_KEY[kind]
        table.rows = sorted(
            table.rows, key=lambda row: key(row[idx]), reverse=workflow.sort.direction == "desc"
        )
    return table


def _bin_extras(frame: _Frame, fid: str) -> dict:
    extras = frame.extras.get(fid)
    return {"bin_min": extras["bin_min"], "bin_width": extras["bin_width"]} if extras else {}


def _aggregate(frame: _Frame, group_by: tuple[str, ...], measures: tuple[Measure, ...]) -> ViewTable:
    for fid in group_by:
        frame.require(fid)
    for m in measures:
        frame.require(m.fid)
        if m.aggregation not in ("count", "count_distinct") and frame.kinds[m.fid] != FLOAT64:
            raise TypeMismatch(f"{m.aggregation} on non-quantitative field {m.fid!r}")

    groups: dict[tuple, list[int]] = {}
    if group_by:
        key_columns = [frame.cells[fid] for fid in group_by]
        for i in range(frame.size):
            key = tuple(col[i] for col in key_columns)
            groups.setdefault(key, []).append(i)
    else:
        groups[()] = list(range(frame.size))  # one global group, even when empty

    columns = [ViewColumn(fid, frame.kinds[fid], **_bin_extras(frame, fid)) for fid in group_by]
    for m in measures:
        columns.append(ViewColumn(m.out_fid, FLOAT64))

    rows = []
    for key, indices in groups.items():
        row = list(key)
        for m in measures:
            values = [frame.cells[m.fid][i] for i in indices]
            row.append(AGGREGATORS[m.aggregation](values))
        rows.append(row)
    return ViewTable(columns, rows)


def execute_pivot(plan: PivotPlan, dataset: Dataset, fields: list[FieldMeta] | None = None) -> list[ViewTable]:
    """Execute every roll-up workflow, in plan order."""
    if fields is None:
        fields = infer_fields(dataset)
    return [execute(wf, dataset, fields) for wf in plan.rollups]


def dataset_preview(dataset: Dataset, fields: list[FieldMeta], limit: int = 100) -> ViewTable:
    """First rows of a dataset keyed by fid (the UI's data-tab preview)."""
    columns = [ViewColumn(meta.fid, col.kind) for meta, col in zip(fields, dataset.columns)]
    n = min(limit, dataset.row_count)
    rows = [[col.values[i] for col in dataset.columns] for i in range(n)]
    return ViewTable(columns, rows)


def view_fids(dataset: Dataset) -> dict[str, str]:
    """Column name -> fid mapping consistent with infer_fields."""
    return {meta.name: meta.fid for meta in infer_fields(dataset)}


__all__ = [
    "AGGREGATORS",
    "ViewColumn",
    "ViewTable",
    "apply_transform",
    "dataset_preview",
    "execute",
    "execute_pivot",
]
