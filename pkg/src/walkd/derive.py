"""Derive computation plans from a chart spec.

Three derivations: the view workflow (filter -> transform -> view -> sort),
the facet plan (axis nesting / facet grid / measure blending), and the
pivot plan (one roll-up workflow per header-prefix pair).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DerivationError, FacetError, PivotError
from .spec_model import (
    ChartSpec,
    FieldRef,
    default_mark,
    parse_table_values,
    resolve_fields,
)
from .table_store import FieldMeta, parse_temporal
from .workflow import FilterClause, FilterStep, Measure, SortStep, TransformStep, ViewStep, Workflow

_STORAGE_BY_SEMANTIC = {
    "nominal": "utf8",
    "ordinal": "float64",
    "quantitative": "float64",
    "temporal": "temporal",
}


@dataclass(frozen=True)
class FacetPlan:
    """Axis assignment for chart rendering.

    Facet lists hold dimensions only; measures holds view-column fids and
    is non-empty exactly when one axis blends measures.
    """

    x_inner: str | None = None
    y_inner: str | None = None
    col_facets: tuple[str, ...] = ()
    row_facets: tuple[str, ...] = ()
    measure_axis: str = "none"  # x | y | none
    measures: tuple[str, ...] = ()


@dataclass(frozen=True)
class PivotPlan:
    """Roll-up plan for the table mark: (|col|+1) x (|row|+1) workflows."""

    col_path: tuple[str, ...]
    row_path: tuple[str, ...]
    measures: tuple[Measure, ...]
    rollups: tuple[Workflow, ...]

    def rollup_index(self, i: int, j: int) -> int:
        return i * (len(self.row_path) + 1) + j


def _is_measure_ref(ref: FieldRef, resolved: dict[str, FieldMeta]) -> bool:
    meta = resolved.get(ref.fid)
    if meta is None:
        raise DerivationError(f"unknown field {ref.fid!r}")
    return ref.aggregation != "none" or meta.analytic_type == "measure"


def _filter_clauses(spec: ChartSpec, fields: list[FieldMeta]) -> tuple[FilterClause, ...]:
    by_fid = {f.fid: f for f in fields}
    clauses = []
    for flt in spec.filters:
        meta = by_fid.get(flt.fid)
        if meta is None:
            raise DerivationError(f"unknown filter field {flt.fid!r}")
        kind = _STORAGE_BY_SEMANTIC[meta.semantic_type]
        if flt.one_of is not None:
            values = flt.one_of
            if kind == "temporal":
                values = tuple(
                    float(parse_temporal(v)) if isinstance(v, str) and parse_temporal(v) is not None else v
                    for v in values
                )
            clauses.append(FilterClause(flt.fid, kind, one_of=values))
        else:
            clauses.append(FilterClause(flt.fid, kind, range=flt.range))
    return tuple(clauses)


def derive_workflow(spec: ChartSpec, fields: list[FieldMeta]) -> Workflow:
    """Spec -> workflow. Callers must validate the spec against fields first."""
    resolved = resolve_fields(spec, fields)

    filter_step = FilterStep(_filter_clauses(spec, fields)) if spec.filters else None
    transform_step = TransformStep(spec.computed) if spec.computed else None

    refs = spec.all_refs()
    if spec.mark == "table":
        refs += [("values", ref) for ref in parse_table_values(spec)]

    if spec.aggregated:
        group_by: list[str] = []
        measures: list[Measure] = []
        for _, ref in refs:
            if _is_measure_ref(ref, resolved):
                if ref.aggregation == "none":
                    raise DerivationError(f"measure {ref.fid!r} lacks an aggregation")
                m = Measure(ref.fid, ref.aggregation, ref.out_fid)
                if m not in measures:
                    measures.append(m)
            elif ref.fid not in group_by:
                group_by.append(ref.fid)
        view = ViewStep("aggregate", group_by=tuple(group_by), measures=tuple(measures))
    else:
        fids = []
        for _, ref in refs:
            if ref.fid not in fids:
                fids.append(ref.fid)
        view = ViewStep("raw", fids=tuple(fids))

    sort_step = None
    if spec.sort is not None:
        if spec.aggregated:
            if spec.sort.fid in view.group_by:
                by = spec.sort.fid
            else:
                match = next((m for m in view.measures if m.fid == spec.sort.fid), None)
                if match is None:
                    raise DerivationError(
                        f"sort field {spec.sort.fid!r} is not part of the aggregated view"
                    )
                by = match.out_fid
        else:
            if spec.sort.fid not in view.fids:
                view = ViewStep("raw", fids=view.fids + (spec.sort.fid,))
            by = spec.sort.fid
        sort_step = SortStep(by, spec.sort.direction)

    return Workflow(view=view, filter=filter_step, transform=transform_step, sort=sort_step)


def _split_axis(spec: ChartSpec, channel: str, resolved: dict[str, FieldMeta]):
    """Split one axis into (dimension fids, measure view-fids); dimensions
    must precede measures."""
    dims: list[str] = []
    measures: list[str] = []
    for ref in spec.refs(channel):
        if _is_measure_ref(ref, resolved):
            measures.append(ref.out_fid)
        else:
            if measures:
                raise FacetError(
                    f"channels.{channel}: dimensions must precede measures"
                )
            dims.append(ref.fid)
    return dims, measures


def derive_facets(spec: ChartSpec, fields: list[FieldMeta]) -> FacetPlan:
    """Nest/cross/blend assignment for non-table marks."""
    mark = default_mark(spec, fields)
    if mark == "table":
        raise FacetError("table marks use a pivot plan, not a facet plan")
    resolved = resolve_fields(spec, fields)
    x_dims, x_meas = _split_axis(spec, "x", resolved)
    y_dims, y_meas = _split_axis(spec, "y", resolved)

    if x_meas and y_meas:
        if len(x_meas) > 1 or len(y_meas) > 1:
            raise FacetError("at most one measure per axis when both axes carry measures")
        return FacetPlan(
            x_inner=x_meas[0],
            y_inner=y_meas[0],
            col_facets=tuple(x_dims),
            row_facets=tuple(y_dims),
            measure_axis="none",
        )

    if x_meas or y_meas:
        if x_meas:
            return FacetPlan(
                x_inner=None,
                y_inner=y_dims[-1] if y_dims else None,
                col_facets=tuple(x_dims),
                row_facets=tuple(y_dims[:-1]),
                measure_axis="x",
                measures=tuple(x_meas),
            )
        return FacetPlan(
            x_inner=x_dims[-1] if x_dims else None,
            y_inner=None,
            col_facets=tuple(x_dims[:-1]),
            row_facets=tuple(y_dims),
            measure_axis="y",
            measures=tuple(y_meas),
        )

    return FacetPlan(
        x_inner=x_dims[-1] if x_dims else None,
        y_inner=y_dims[-1] if y_dims else None,
        col_facets=tuple(x_dims[:-1]),
        row_facets=tuple(y_dims[:-1]),
        measure_axis="none",
    )


def derive_pivot(spec: ChartSpec, fields: list[FieldMeta]) -> PivotPlan:
    """One roll-up workflow per (col-prefix, row-prefix) pair, eagerly."""
    if spec.mark != "table":
        raise PivotError("pivot plans apply to the table mark only")
    resolved = resolve_fields(spec, fields)
    for channel in ("x", "y"):
        for ref in spec.refs(channel):
            if _is_measure_ref(ref, resolved):
                raise PivotError(f"measure {ref.fid!r} on pivot axis {channel}")
    col_path = tuple(ref.fid for ref in spec.refs("x"))
    row_path = tuple(ref.fid for ref in spec.refs("y"))

    value_refs = parse_table_values(spec)
    if not value_refs:
        raise PivotError("table mark requires at least one measure in table_values")
    measures = tuple(Measure(r.fid, r.aggregation, r.out_fid) for r in value_refs)
    for m in measures:
        if m.aggregation == "none":
            raise PivotError(f"table value {m.fid!r} lacks an aggregation")

    filter_step = FilterStep(_filter_clauses(spec, fields)) if spec.filters else None
    transform_step = TransformStep(spec.computed) if spec.computed else None

    rollups = []
    for i in range(len(col_path) + 1):
        for j in range(len(row_path) + 1):
            rollups.append(
                Workflow(
                    view=ViewStep("aggregate", group_by=col_path[:i] + row_path[:j], measures=measures),
                    filter=filter_step,
                    transform=transform_step,
                )
            )
    return PivotPlan(col_path=col_path, row_path=row_path, measures=measures, rollups=tuple(rollups))
