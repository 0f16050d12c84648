"""Render view data: Vega-Lite v5 documents, pivot models, HTML export.

Charts receive pre-aggregated data and never use Vega-Lite's own
aggregate property, so both computation backends look identical from
here. ChartDoc JSON is canonical (sorted keys, compact) for golden
tests.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass, field
from importlib import resources

from .derive import FacetPlan, PivotPlan
from .engine import ViewTable
from .errors import InconsistentRollups, RenderError
from .spec_model import (
    ChartSpec,
    _sort_key,
    default_mark,
    resolve_fields,
)
from .table_store import TEMPORAL, FieldMeta, format_number, format_temporal

VEGA_LITE_SCHEMA_URL = "https://vega.github.io/schema/vega-lite/v5.json"

# Pinned chart runtime for exported HTML (the only external fetches).
RUNTIME_SCRIPTS = (
    "https://cdn.jsdelivr.net/npm/vega@5.30.0",
    "https://cdn.jsdelivr.net/npm/vega-lite@5.23.0",
    "https://cdn.jsdelivr.net/npm/vega-embed@6.26.0",
)

_VEGA_TYPES = {
    "nominal": "nominal",
    "ordinal": "ordinal",
    "quantitative": "quantitative",
    "temporal": "temporal",
}


def chart_json(doc: dict) -> str:
    """Byte-stable canonical encoding for chart documents."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def vega_lite_schema() -> dict:
    with resources.files("walkd.resources").joinpath("vega-lite-v5.schema.json").open("rb") as fh:
        return json.load(fh)


def _bin_label(value, lo_col) -> str | None:
    if value is None:
        return None
    return f"{format_number(value)}–{format_number(value + lo_col.bin_width)}"


def _view_records(view: ViewTable) -> list[dict]:
    """Inline data rows keyed by fid; temporal as ISO strings, bin columns
    as interval labels."""
    records = []
    for row in view.rows:
        rec = {}
        for col, value in zip(view.columns, row):
            if value is None:
                rec[col.fid] = None
            elif col.kind == TEMPORAL:
                rec[col.fid] = format_temporal(value)
            elif col.bin_width is not None:
                rec[col.fid] = _bin_label(value, col)
            else:
                rec[col.fid] = value
        records.append(rec)
    return records


def _bin_sort_order(view: ViewTable, fid: str) -> list[str]:
    idx = view.column_index(fid)
    col = view.columns[idx]
    values = sorted({row[idx] for row in view.rows if row[idx] is not None})
    return [_bin_label(v, col) for v in values]


def _facet_key(fids: tuple[str, ...]) -> str:
    return "__".join(fids)


def to_chart(
    spec: ChartSpec,
    plan: FacetPlan,
    view: ViewTable,
    fields: list[FieldMeta],
) -> dict:
    """Build the Vega-Lite v5 document for a non-table mark."""
    if spec.config.coord == "geographic":
        raise RenderError("geographic rendering unsupported")
    mark = default_mark(spec, fields)
    if mark == "table":
        raise RenderError("table marks render as pivot models")
    resolved = resolve_fields(spec, fields)
    view_fids = {c.fid for c in view.columns}

    def require(fid: str):
        if fid not in view_fids:
            raise RenderError(f"field {fid!r} missing from view data")

    def dim_encoding(fid: str) -> dict:
        require(fid)
        meta = resolved.get(fid)
        semantic = meta.semantic_type if meta is not None else "nominal"
        enc = {"field": fid, "type": _VEGA_TYPES[semantic]}
        col = view.columns[view.column_index(fid)]
        if col.bin_width is not None:
            enc["type"] = "ordinal"
            enc["sort"] = _bin_sort_order(view, fid)
        return enc

    def measure_encoding(fid: str, stacked_axis: bool) -> dict:
        require(fid)
        enc = {"field": fid, "type": "quantitative"}
        if stacked_axis and spec.stack != "stack":
            enc["stack"] = "normalize" if spec.stack == "normalize" else None
        return enc

    records = _view_records(view)

    # Facet channels: one level maps directly; deeper levels collapse into
    # a synthesized key column (Vega-Lite has no facet-in-facet).
    facet_enc: dict[str, dict] = {}
    for direction, fids in (("column", plan.col_facets), ("row", plan.row_facets)):
        if not fids:
            continue
        if len(fids) == 1:
            facet_enc[direction] = dim_encoding(fids[0])
            facet_enc[direction].pop("sort", None)
        else:
            key = _facet_key(fids)
            for rec in records:
                rec[key] = " / ".join(
                    "null" if rec[f] is None else str(rec[f]) for f in fids
                )
            facet_enc[direction] = {"field": key, "type": "nominal"}

    def unit_encoding(measure_fid: str | None) -> dict:
        enc: dict = {}
        if plan.measure_axis == "x":
            enc["x"] = measure_encoding(measure_fid, stacked_axis=True)
        elif plan.x_inner is not None:
            enc["x"] = (
                measure_encoding(plan.x_inner, stacked_axis=False)
                if _is_measure_fid(plan.x_inner, resolved)
                else dim_encoding(plan.x_inner)
            )
        if plan.measure_axis == "y":
            enc["y"] = measure_encoding(measure_fid, stacked_axis=True)
        elif plan.y_inner is not None:
            enc["y"] = (
                measure_encoding(plan.y_inner, stacked_axis=False)
                if _is_measure_fid(plan.y_inner, resolved)
                else dim_encoding(plan.y_inner)
            )
        for channel in ("color", "size", "shape", "opacity"):
            refs = spec.refs(channel)
            if refs:
                ref = refs[0]
                if _is_measure_fid(ref.out_fid, resolved) or ref.aggregation != "none":
                    enc[channel] = measure_encoding(ref.out_fid, stacked_axis=False)
                else:
                    enc[channel] = dim_encoding(ref.fid)
        enc.update(facet_enc)
        return enc

    def unit_spec(measure_fid: str | None) -> dict:
        unit: dict = {"mark": mark, "encoding": unit_encoding(measure_fid)}
        if spec.config.layout is not None:
            unit["width"], unit["height"] = spec.config.layout
        return unit

    doc: dict = {"$schema": VEGA_LITE_SCHEMA_URL, "data": {"values": records}}
    if len(plan.measures) > 1:
        panels = [unit_spec(m) for m in plan.measures]
        doc["vconcat" if plan.measure_axis == "y" else "hconcat"] = panels
    elif len(plan.measures) == 1:
        doc.update(unit_spec(plan.measures[0]))
    else:
        doc.update(unit_spec(None))
    return doc


def _is_measure_fid(fid: str, resolved: dict[str, FieldMeta]) -> bool:
    meta = resolved.get(fid)
    if meta is not None:
        return meta.analytic_type == "measure"
    # out_fids of aggregated measures are not dataset fields
    return True


# ---------------------------------------------------------------------------
# pivot model
# ---------------------------------------------------------------------------


@dataclass
class PivotNode:
    value: object
    depth: int
    leaf_span: int = 1
    children: list = field(default_factory=list)

    def to_json(self, kind_at) -> dict:
        value = self.value
        if value is not None and kind_at(self.depth - 1) == TEMPORAL:
            value = format_temporal(value)
        return {
            "value": value,
            "depth": self.depth,
            "leaf_span": self.leaf_span,
            "children": [c.to_json(kind_at) for c in self.children],
        }


@dataclass
class PivotModel:
    """Header trees plus a cell map keyed by (col_prefix, row_prefix)."""

    col_tree: list[PivotNode]
    row_tree: list[PivotNode]
    measures: list[str]
    cells: dict
    col_kinds: list[str]
    row_kinds: list[str]

    def cell(self, col_prefix: tuple, row_prefix: tuple):
        return self.cells.get((tuple(col_prefix), tuple(row_prefix)))

    def to_json(self) -> dict:
        def col_kind(depth):
            return self.col_kinds[depth]

        def row_kind(depth):
            return self.row_kinds[depth]

        def convert(prefix, kinds):
            return [
                format_temporal(v) if v is not None and kinds[i] == TEMPORAL else v
                for i, v in enumerate(prefix)
            ]

        return {
            "col_tree": [n.to_json(col_kind) for n in self.col_tree],
            "row_tree": [n.to_json(row_kind) for n in self.row_tree],
            "measures": list(self.measures),
            "cells": [
                {
                    "col": convert(ckey, self.col_kinds),
                    "row": convert(rkey, self.row_kinds),
                    "values": values,
                }
                for (ckey, rkey), values in self.cells.items()
            ],
        }


def _path_sort_key(path: tuple) -> tuple:
    return tuple(_sort_key(v) for v in path)


def _build_tree(paths: list[tuple]) -> list[PivotNode]:
    """Nest sorted value paths into header nodes with leaf spans."""
    roots: list[PivotNode] = []
    nodes: dict[tuple, PivotNode] = {}
    for path in paths:
        for depth in range(1, len(path) + 1):
            prefix = path[:depth]
            if prefix in nodes:
                continue
            node = PivotNode(value=prefix[-1], depth=depth)
            nodes[prefix] = node
            if depth == 1:
                roots.append(node)
            else:
                nodes[prefix[:-1]].children.append(node)

    def span(node_prefix: tuple, node: PivotNode) -> int:
        if not node.children:
            node.leaf_span = 1
        else:
            node.leaf_span = sum(
                span(node_prefix + (child.value,), child) for child in node.children
            )
        return node.leaf_span

    for root in roots:
        span((root.value,), root)
    return roots


def to_pivot(plan: PivotPlan, rollups: list[ViewTable]) -> PivotModel:
    """Assemble header trees and the prefix-cell map from roll-up tables."""
    expected = (len(plan.col_path) + 1) * (len(plan.row_path) + 1)
    if len(rollups) != expected:
        raise InconsistentRollups(f"expected {expected} roll-ups, got {len(rollups)}")
    n_measures = len(plan.measures)

    def keys_of(table: ViewTable, depth: int) -> list[tuple]:
        return [tuple(row[:depth]) for row in table.rows]

    col_full = sorted(
        keys_of(rollups[plan.rollup_index(len(plan.col_path), 0)], len(plan.col_path)),
        key=_path_sort_key,
    )
    row_full = sorted(
        keys_of(rollups[plan.rollup_index(0, len(plan.row_path))], len(plan.row_path)),
        key=_path_sort_key,
    )

    # every deeper path must extend a path present one level up
    for depth in range(len(plan.col_path)):
        have = set(keys_of(rollups[plan.rollup_index(depth, 0)], depth))
        need = {p[:depth] for p in col_full}
        if need - have:
            raise InconsistentRollups(f"column paths at depth {depth + 1} lack prefixes at depth {depth}")
    for depth in range(len(plan.row_path)):
        have = set(keys_of(rollups[plan.rollup_index(0, depth)], depth))
        need = {p[:depth] for p in row_full}
        if need - have:
            raise InconsistentRollups(f"row paths at depth {depth + 1} lack prefixes at depth {depth}")

    cells: dict = {}
    for i in range(len(plan.col_path) + 1):
        for j in range(len(plan.row_path) + 1):
            table = rollups[plan.rollup_index(i, j)]
            for row in table.rows:
                ckey = tuple(row[:i])
                rkey = tuple(row[i : i + j])
                cells[(ckey, rkey)] = list(row[i + j : i + j + n_measures])

    deepest = rollups[plan.rollup_index(len(plan.col_path), len(plan.row_path))]
    col_kinds = [deepest.columns[k].kind for k in range(len(plan.col_path))]
    row_kinds = [
        deepest.columns[len(plan.col_path) + k].kind for k in range(len(plan.row_path))
    ]

    return PivotModel(
        col_tree=_build_tree(col_full),
        row_tree=_build_tree(row_full),
        measures=[m.out_fid for m in plan.measures],
        cells=cells,
        col_kinds=col_kinds,
        row_kinds=row_kinds,
    )


# ---------------------------------------------------------------------------
# HTML export
# ---------------------------------------------------------------------------

_HTML_STYLE = """
body { font-family: system-ui, sans-serif; margin: 1.5rem; }
.tabs { display: flex; gap: .25rem; border-bottom: 1px solid #ccc; margin-bottom: 1rem; }
.tabs button { border: 1px solid #ccc; border-bottom: none; background: #f5f5f5;
  padding: .4rem .9rem; cursor: pointer; border-radius: 4px 4px 0 0; }
.tabs button.active { background: #fff; font-weight: 600; }
.panel { display: none; }
.panel.active { display: block; }
table.pivot { border-collapse: collapse; }
table.pivot th, table.pivot td { border: 1px solid #bbb; padding: .25rem .6rem; text-align: right; }
table.pivot th { background: #fafafa; }
""".strip()

_HTML_SCRIPT = """
function showTab(i) {
  document.querySelectorAll('.tabs button').forEach((b, j) => b.classList.toggle('active', i === j));
  document.querySelectorAll('.panel').forEach((p, j) => p.classList.toggle('active', i === j));
}
document.querySelectorAll('script[type="application/json"][data-chart]').forEach((node) => {
  vegaEmbed('#' + node.dataset.chart, JSON.parse(node.textContent), {actions: false});
});
showTab(0);
""".strip()


def _leaf_paths(tree: list[PivotNode]) -> list[tuple]:
    leaves: list[tuple] = []

    def walk(node: PivotNode, prefix: tuple):
        path = prefix + (node.value,)
        if node.children:
            for child in node.children:
                walk(child, path)
        else:
            leaves.append(path)

    for root in tree:
        walk(root, ())
    return leaves


def _format_header(value, kind: str) -> str:
    if value is None:
        return "(null)"
    if kind == TEMPORAL:
        return format_temporal(value)
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def _pivot_html(model: PivotModel) -> str:
    """Fully expanded static table with spanned header cells."""
    col_leaves = _leaf_paths(model.col_tree)
    row_leaves = _leaf_paths(model.row_tree)
    n_measures = len(model.measures)
    parts = ['<table class="pivot">']

    col_depth = len(model.col_kinds)
    row_depth = len(model.row_kinds)
    # column header rows, one per depth level
    level_nodes = [(n, ()) for n in model.col_tree]
    for depth in range(col_depth):
        cells = []
        if depth == 0 and row_depth:
            cells.append(f'<th rowspan="{col_depth + 1}" colspan="{row_depth}"></th>')
        for node, _prefix in level_nodes:
            label = html.escape(_format_header(node.value, model.col_kinds[depth]))
            cells.append(f'<th colspan="{node.leaf_span * n_measures}">{label}</th>')
        parts.append("<tr>" + "".join(cells) + "</tr>")
        level_nodes = [
            (child, prefix + (node.value,))
            for node, prefix in level_nodes
            for child in node.children
        ]
    # measure name row
    measure_cells = []
    if not col_depth and row_depth:
        measure_cells.append(f'<th rowspan="1" colspan="{row_depth}"></th>')
    for _ in col_leaves or [()]:
        for m in model.measures:
            measure_cells.append(f"<th>{html.escape(m)}</th>")
    parts.append("<tr>" + "".join(measure_cells) + "</tr>")

    # body rows with row-header spans
    emitted: set[tuple] = set()
    for leaf in row_leaves or [()]:
        cells = []
        for depth in range(row_depth):
            prefix = leaf[: depth + 1]
            if prefix in emitted:
                continue
            emitted.add(prefix)
            span = sum(1 for other in row_leaves if other[: depth + 1] == prefix)
            label = html.escape(_format_header(leaf[depth], model.row_kinds[depth]))
            cells.append(f'<th rowspan="{span}">{label}</th>')
        for cleaf in col_leaves or [()]:
            values = model.cell(cleaf, leaf)
            for k in range(n_measures):
                v = values[k] if values is not None else None
                text = "" if v is None else format_number(v) if isinstance(v, (int, float)) else str(v)
                cells.append(f"<td>{html.escape(text)}</td>")
        parts.append("<tr>" + "".join(cells) + "</tr>")
    parts.append("</table>")
    return "".join(parts)


def export_html(tabs: list[tuple[ChartSpec, object]]) -> str:
    """One self-contained page: a tab per spec, charts embedded inline."""
    buttons = []
    panels = []
    chart_blobs = []
    for i, (spec, artifact) in enumerate(tabs):
        title = html.escape(spec.name)
        buttons.append(f'<button onclick="showTab({i})">{title}</button>')
        if isinstance(artifact, PivotModel):
            panels.append(f'<div class="panel" id="panel-{i}">{_pivot_html(artifact)}</div>')
        else:
            panels.append(f'<div class="panel" id="panel-{i}"><div id="chart-{i}"></div></div>')
            blob = chart_json(artifact).replace("</", "<\\/")
            chart_blobs.append(
                f'<script type="application/json" data-chart="chart-{i}">{blob}</script>'
            )
    scripts = "\n".join(f'<script src="{url}"></script>' for url in RUNTIME_SCRIPTS)
    return f"""<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>walkd export</title>
<style>{_HTML_STYLE}</style>
{scripts}
</head>
<body>
<div class="tabs">{''.join(buttons)}</div>
{''.join(panels)}
{''.join(chart_blobs)}
<script>{_HTML_SCRIPT}</script>
</body>
</html>
"""
