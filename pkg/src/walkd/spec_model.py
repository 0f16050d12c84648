"""Declarative chart specification: parse, validate, serialize, default mark.

The JSON document (schema v1) is the interchange format between the CLI,
the HTTP API, and the browser UI. Serialization is canonical and byte
stable: fixed key order, compact separators, integral numbers printed
without a fraction part.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from .errors import JsonSyntax, SchemaViolation, UnsupportedVersion, Violation
from .table_store import EXACT_INT_LIMIT, FieldMeta, parse_temporal

MARKS = ("auto", "bar", "line", "area", "point", "circle", "tick", "rect", "arc", "text", "table")
AGGREGATIONS = ("none", "sum", "mean", "count", "min", "max", "median", "variance", "stddev", "count_distinct")
CHANNELS = ("x", "y", "color", "size", "shape", "opacity")
SINGLE_SLOT_CHANNELS = ("color", "size", "shape", "opacity")
STACK_MODES = ("stack", "normalize", "none")
COORDS = ("generic", "geographic")
COMPUTED_KINDS = ("log2", "log10", "bin")

SPEC_VERSION = 1
TABLE_VALUES_KEY = "table_values"


@dataclass(frozen=True)
class FieldRef:
    fid: str
    aggregation: str = "none"

    @property
    def out_fid(self) -> str:
        """Column name this ref produces in an aggregated view."""
        if self.aggregation == "none":
            return self.fid
        return f"{self.fid}_{self.aggregation}"

    def to_json(self) -> dict:
        if self.aggregation == "none":
            return {"fid": self.fid}
        return {"fid": self.fid, "aggregation": self.aggregation}


@dataclass(frozen=True)
class ComputedField:
    out_fid: str
    source_fid: str
    kind: str  # log2 | log10 | bin
    k: int | None = None  # bin count, bin only

    def to_json(self) -> dict:
        doc = {"out_fid": self.out_fid, "source_fid": self.source_fid, "kind": self.kind}
        if self.kind == "bin":
            doc["k"] = self.k
        return doc


@dataclass(frozen=True)
class Filter:
    """Keep rows where fid's value is in one_of, or inside [lo, hi]."""

    fid: str
    one_of: tuple | None = None
    range: tuple | None = None  # (lo, hi), inclusive both ends

    def __post_init__(self):
        if (self.one_of is None) == (self.range is None):
            raise ValueError("exactly one of one_of/range is required")
        if self.one_of is not None:
            values = tuple(
                ("true" if v else "false") if isinstance(v, bool) else v for v in self.one_of
            )
            object.__setattr__(self, "one_of", normalize_one_of(values))
        else:
            lo, hi = self.range
            object.__setattr__(self, "range", (float(lo), float(hi)))

    def to_json(self) -> dict:
        if self.one_of is not None:
            return {"fid": self.fid, "one_of": list(self.one_of)}
        return {"fid": self.fid, "range": list(self.range)}


@dataclass(frozen=True)
class SortRule:
    fid: str
    direction: str  # asc | desc


@dataclass(frozen=True)
class SpecConfig:
    coord: str = "generic"
    layout: tuple | None = None  # None = auto, else (w, h) pixels
    palette: str = "default"
    style: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, SpecConfig):
            return NotImplemented
        return (
            self.coord == other.coord
            and self.layout == other.layout
            and self.palette == other.palette
            and self.style == other.style
        )


@dataclass(frozen=True)
class ChartSpec:
    """The full declarative chart description (document schema v1)."""

    name: str = "Chart 1"
    mark: str = "auto"
    aggregated: bool = True
    channels: dict = field(default_factory=dict)  # channel -> tuple[FieldRef]
    computed: tuple = ()
    filters: tuple = ()
    sort: SortRule | None = None
    stack: str = "none"
    config: SpecConfig = field(default_factory=SpecConfig)
    version: int = SPEC_VERSION

    def __eq__(self, other):
        if not isinstance(other, ChartSpec):
            return NotImplemented
        return spec_to_jsonable(self) == spec_to_jsonable(other)

    def refs(self, channel: str) -> tuple[FieldRef, ...]:
        return self.channels.get(channel, ())

    def all_refs(self) -> list[tuple[str, FieldRef]]:
        return [(ch, ref) for ch in CHANNELS for ref in self.refs(ch)]


def _sort_key(value):
    if value is None:
        return (0, 0, "")
    if isinstance(value, (int, float)):
        return (1, float(value), "")
    return (2, 0, value)


def normalize_one_of(values) -> tuple:
    """Canonical order for membership sets: nulls, numbers, strings."""
    return tuple(sorted(set(values), key=_sort_key))


# ---------------------------------------------------------------------------
# parse
# ---------------------------------------------------------------------------


def _expect(cond: bool, path: str, reason: str):
    if not cond:
        raise SchemaViolation(path, reason)


def _check_keys(doc: dict, allowed: set, path: str):
    unknown = set(doc) - allowed
    _expect(not unknown, path, f"unknown keys: {sorted(unknown)}")


def _parse_field_ref(doc, path: str) -> FieldRef:
    _expect(isinstance(doc, dict), path, "field reference must be an object")
    _check_keys(doc, {"fid", "aggregation"}, path)
    _expect(isinstance(doc.get("fid"), str) and doc["fid"], f"{path}.fid", "fid must be a non-empty string")
    agg = doc.get("aggregation", "none")
    _expect(agg in AGGREGATIONS, f"{path}.aggregation", f"unknown aggregation {agg!r}")
    return FieldRef(doc["fid"], agg)


def _parse_scalar(value, path: str):
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, bool):
        # datasets store booleans as text; align filter values with that
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        _expect(math.isfinite(value), path, "number must be finite")
        return float(value)
    raise SchemaViolation(path, "values must be scalars")


def _parse_range_endpoint(value, path: str) -> float:
    if isinstance(value, str):
        millis = parse_temporal(value)
        _expect(millis is not None, path, "range endpoints must be numbers or ISO-8601 dates")
        return float(millis)
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool), path, "range endpoints must be numbers or ISO-8601 dates")
    _expect(math.isfinite(value), path, "range endpoints must be finite")
    return float(value)


def _parse_filter(doc, path: str) -> Filter:
    _expect(isinstance(doc, dict), path, "filter must be an object")
    _check_keys(doc, {"fid", "one_of", "range"}, path)
    _expect(isinstance(doc.get("fid"), str) and doc["fid"], f"{path}.fid", "fid must be a non-empty string")
    has_one_of = "one_of" in doc
    has_range = "range" in doc
    _expect(has_one_of != has_range, path, "exactly one of one_of/range is required")
    if has_one_of:
        values = doc["one_of"]
        _expect(isinstance(values, list) and values, f"{path}.one_of", "one_of must be a non-empty array")
        parsed = [_parse_scalar(v, f"{path}.one_of[{i}]") for i, v in enumerate(values)]
        return Filter(doc["fid"], one_of=normalize_one_of(parsed))
    rng = doc["range"]
    _expect(isinstance(rng, list) and len(rng) == 2, f"{path}.range", "range must be [lo, hi]")
    lo = _parse_range_endpoint(rng[0], f"{path}.range[0]")
    hi = _parse_range_endpoint(rng[1], f"{path}.range[1]")
    _expect(lo <= hi, f"{path}.range", "lo must be <= hi")
    return Filter(doc["fid"], range=(lo, hi))


def _parse_computed(doc, path: str) -> ComputedField:
    _expect(isinstance(doc, dict), path, "computed field must be an object")
    _check_keys(doc, {"out_fid", "source_fid", "kind", "k"}, path)
    for key in ("out_fid", "source_fid"):
        _expect(isinstance(doc.get(key), str) and doc[key], f"{path}.{key}", "must be a non-empty string")
    kind = doc.get("kind")
    _expect(kind in COMPUTED_KINDS, f"{path}.kind", f"unknown kind {kind!r}")
    if kind == "bin":
        k = doc.get("k")
        _expect(isinstance(k, int) and not isinstance(k, bool) and k > 0, f"{path}.k", "bin requires a positive integer k")
        return ComputedField(doc["out_fid"], doc["source_fid"], "bin", k)
    _expect("k" not in doc, f"{path}.k", "k is only valid for bin")
    return ComputedField(doc["out_fid"], doc["source_fid"], kind)


def _parse_config(doc, path: str) -> SpecConfig:
    _expect(isinstance(doc, dict), path, "config must be an object")
    _check_keys(doc, {"coord", "layout", "palette", "style"}, path)
    coord = doc.get("coord", "generic")
    _expect(coord in COORDS, f"{path}.coord", f"unknown coord {coord!r}")
    layout_doc = doc.get("layout", "auto")
    if layout_doc == "auto":
        layout = None
    else:
        _expect(isinstance(layout_doc, dict), f"{path}.layout", 'layout must be "auto" or {"w": px, "h": px}')
        _check_keys(layout_doc, {"w", "h"}, f"{path}.layout")
        w, h = layout_doc.get("w"), layout_doc.get("h")
        for key, v in (("w", w), ("h", h)):
            _expect(
                isinstance(v, int) and not isinstance(v, bool) and v > 0,
                f"{path}.layout.{key}",
                "must be a positive integer",
            )
        layout = (w, h)
    palette = doc.get("palette", "default")
    _expect(isinstance(palette, str), f"{path}.palette", "palette must be a string")
    style = doc.get("style", {})
    _expect(isinstance(style, dict), f"{path}.style", "style must be an object")
    return SpecConfig(coord=coord, layout=layout, palette=palette, style=style)


def parse_spec(text: str) -> ChartSpec:
    """Parse and structurally validate a spec JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise JsonSyntax(str(exc)) from None
    return spec_from_jsonable(doc)


def spec_from_jsonable(doc) -> ChartSpec:
    _expect(isinstance(doc, dict), "$", "spec must be an object")
    _check_keys(
        doc,
        {"version", "name", "mark", "aggregated", "channels", "computed", "filters", "sort", "stack", "config"},
        "$",
    )
    version = doc.get("version")
    _expect(isinstance(version, int) and not isinstance(version, bool), "version", "version must be an integer")
    if version != SPEC_VERSION:
        raise UnsupportedVersion(f"version {version}, expected {SPEC_VERSION}")
    _expect(isinstance(doc.get("name"), str), "name", "name must be a string")
    mark = doc.get("mark")
    _expect(mark in MARKS, "mark", f"unknown mark {mark!r}")
    _expect(isinstance(doc.get("aggregated"), bool), "aggregated", "aggregated must be a boolean")

    channels_doc = doc.get("channels")
    _expect(isinstance(channels_doc, dict), "channels", "channels must be an object")
    channels: dict = {}
    for ch, refs_doc in channels_doc.items():
        _expect(ch in CHANNELS, f"channels.{ch}", f"unknown channel {ch!r}")
        _expect(isinstance(refs_doc, list), f"channels.{ch}", "channel must hold an array")
        refs = tuple(_parse_field_ref(r, f"channels.{ch}[{i}]") for i, r in enumerate(refs_doc))
        if ch in SINGLE_SLOT_CHANNELS:
            _expect(len(refs) <= 1, f"channels.{ch}", "channel holds at most one field")
        if refs:
            channels[ch] = refs

    computed_doc = doc.get("computed")
    _expect(isinstance(computed_doc, list), "computed", "computed must be an array")
    computed = tuple(_parse_computed(c, f"computed[{i}]") for i, c in enumerate(computed_doc))
    outs = [c.out_fid for c in computed]
    _expect(len(set(outs)) == len(outs), "computed", "duplicate out_fid")

    filters_doc = doc.get("filters")
    _expect(isinstance(filters_doc, list), "filters", "filters must be an array")
    filters = tuple(_parse_filter(f, f"filters[{i}]") for i, f in enumerate(filters_doc))

    sort_doc = doc.get("sort")
    sort = None
    if sort_doc is not None:
        _expect(isinstance(sort_doc, dict), "sort", "sort must be an object")
        _check_keys(sort_doc, {"fid", "direction"}, "sort")
        _expect(isinstance(sort_doc.get("fid"), str) and sort_doc["fid"], "sort.fid", "fid must be a non-empty string")
        _expect(sort_doc.get("direction") in ("asc", "desc"), "sort.direction", "direction must be asc or desc")
        sort = SortRule(sort_doc["fid"], sort_doc["direction"])

    stack = doc.get("stack")
    _expect(stack in STACK_MODES, "stack", f"unknown stack mode {stack!r}")
    config = _parse_config(doc.get("config"), "config")

    return ChartSpec(
        version=version,
        name=doc["name"],
        mark=mark,
        aggregated=doc["aggregated"],
        channels=channels,
        computed=computed,
        filters=filters,
        sort=sort,
        stack=stack,
        config=config,
    )


# ---------------------------------------------------------------------------
# serialize
# ---------------------------------------------------------------------------


def _canon_number(value):
    """Integral numbers print as integers; keeps serializers byte-compatible."""
    if isinstance(value, float) and value.is_integer() and abs(value) <= EXACT_INT_LIMIT:
        return int(value)
    return value


def _canon(value):
    if isinstance(value, dict):
        return {k: _canon(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canon(v) for v in value]
    return _canon_number(value)


def canonical_json(doc) -> str:
    """Compact, order-preserving JSON with canonical number forms."""
    return json.dumps(_canon(doc), separators=(",", ":"), ensure_ascii=False)


def spec_to_jsonable(spec: ChartSpec) -> dict:
    """Schema-ordered plain-dict form of a spec."""
    doc: dict = {
        "version": spec.version,
        "name": spec.name,
        "mark": spec.mark,
        "aggregated": spec.aggregated,
        "channels": {ch: [r.to_json() for r in spec.refs(ch)] for ch in CHANNELS if spec.refs(ch)},
        "computed": [c.to_json() for c in spec.computed],
        "filters": [f.to_json() for f in spec.filters],
    }
    if spec.sort is not None:
        doc["sort"] = {"fid": spec.sort.fid, "direction": spec.sort.direction}
    doc["stack"] = spec.stack
    doc["config"] = {
        "coord": spec.config.coord,
        "layout": "auto" if spec.config.layout is None else {"w": spec.config.layout[0], "h": spec.config.layout[1]},
        "palette": spec.config.palette,
        "style": {k: spec.config.style[k] for k in sorted(spec.config.style)},
    }
    return doc


def serialize_spec(spec: ChartSpec) -> str:
    return canonical_json(spec_to_jsonable(spec))


# ---------------------------------------------------------------------------
# field resolution and validation
# ---------------------------------------------------------------------------


def computed_field_meta(cf: ComputedField) -> FieldMeta:
    """Synthesized metadata for a transform output column.

    Log outputs are quantitative measures; bin outputs are ordinal
    dimensions (they label intervals and act as group-by keys).
    """
    if cf.kind == "bin":
        return FieldMeta(cf.out_fid, cf.out_fid, "ordinal", "dimension", 0)
    return FieldMeta(cf.out_fid, cf.out_fid, "quantitative", "measure", 0)


def resolve_fields(spec: ChartSpec, fields: list[FieldMeta]) -> dict[str, FieldMeta]:
    """fid -> FieldMeta over dataset fields plus computed outputs.

    A computed out_fid shadows a dataset fid of the same name.
    """
    resolved = {f.fid: f for f in fields}
    for cf in spec.computed:
        resolved[cf.out_fid] = computed_field_meta(cf)
    return resolved


def ref_class(ref: FieldRef, resolved: dict[str, FieldMeta]) -> str | None:
    """measure | nominal | ordinal | quantitative | temporal, None if unknown."""
    meta = resolved.get(ref.fid)
    if meta is None:
        return None
    if ref.aggregation != "none" or meta.analytic_type == "measure":
        return "measure"
    return meta.semantic_type


def parse_table_values(spec: ChartSpec) -> tuple[FieldRef, ...]:
    """Measure refs for the table mark, from config.style.table_values."""
    raw = spec.config.style.get(TABLE_VALUES_KEY, [])
    _expect(isinstance(raw, list), f"config.style.{TABLE_VALUES_KEY}", "must be an array")
    return tuple(
        _parse_field_ref(v, f"config.style.{TABLE_VALUES_KEY}[{i}]") for i, v in enumerate(raw)
    )


def default_mark(spec: ChartSpec, fields: list[FieldMeta]) -> str:
    """Resolve mark=auto from the innermost x/y classes and measure count."""
    if spec.mark != "auto":
        return spec.mark
    resolved = resolve_fields(spec, fields)
    x_refs, y_refs = spec.refs("x"), spec.refs("y")
    xc = ref_class(x_refs[-1], resolved) if x_refs else None
    yc = ref_class(y_refs[-1], resolved) if y_refs else None
    measures = sum(1 for r in x_refs + y_refs if ref_class(r, resolved) == "measure")
    if measures == 0:
        return "table"
    if xc in ("temporal", "ordinal"):
        return "line"
    if xc == "nominal":
        return "bar"
    if xc == "measure" and yc == "measure":
        return "point"
    if yc in ("temporal", "ordinal"):
        return "line"
    if yc == "nominal":
        return "bar"
    return "tick"


def validate_against(spec: ChartSpec, fields: list[FieldMeta]) -> list[Violation]:
    """Check fid resolution, aggregation legality, and computed sources.

    Violations are returned, never raised. Adding a FieldMeta can only
    remove violations, never add one.
    """
    violations: list[Violation] = []
    dataset_fields = {f.fid: f for f in fields}
    resolved = resolve_fields(spec, fields)

    def check_ref(ref: FieldRef, path: str):
        meta = resolved.get(ref.fid)
        if meta is None:
            violations.append(Violation("unresolved_field", path, f"unknown field {ref.fid!r}"))
            return
        if ref.aggregation not in ("none", "count") and meta.semantic_type != "quantitative":
            violations.append(
                Violation(
                    "illegal_aggregation",
                    path,
                    f"{ref.aggregation} requires a quantitative field, {ref.fid!r} is {meta.semantic_type}",
                )
            )

    for ch in CHANNELS:
        for i, ref in enumerate(spec.refs(ch)):
            path = f"channels.{ch}[{i}]"
            check_ref(ref, path)
            meta = resolved.get(ref.fid)
            if meta is None:
                continue
            if spec.aggregated and spec.mark != "table" and meta.analytic_type == "measure" and ref.aggregation == "none":
                violations.append(
                    Violation("missing_aggregation", path, f"aggregated spec requires an aggregation on measure {ref.fid!r}")
                )
            if spec.mark == "table" and ch in ("x", "y"):
                if meta.analytic_type == "measure" or ref.aggregation != "none":
                    violations.append(
                        Violation("table_axis_measure", path, "table axes hold dimensions only")
                    )

    for i, cf in enumerate(spec.computed):
        path = f"computed[{i}]"
        source = dataset_fields.get(cf.source_fid)
        if source is None:
            violations.append(
                Violation("unresolved_field", path, f"unknown source field {cf.source_fid!r}")
            )
        elif source.semantic_type != "quantitative":
            violations.append(
                Violation("non_quantitative_source", path, f"{cf.kind} requires a quantitative source")
            )

    for i, flt in enumerate(spec.filters):
        path = f"filters[{i}]"
        if flt.fid in dataset_fields:
            continue
        if any(cf.out_fid == flt.fid for cf in spec.computed):
            violations.append(
                Violation("filter_on_computed", path, "filters run before transforms and cannot see computed fields")
            )
        else:
            violations.append(Violation("unresolved_field", path, f"unknown field {flt.fid!r}"))

    if spec.sort is not None and spec.sort.fid not in resolved:
        violations.append(Violation("unresolved_field", "sort", f"unknown field {spec.sort.fid!r}"))

    if spec.refs("shape"):
        resolved_mark = default_mark(spec, fields)
        if resolved_mark not in ("point", "circle"):
            violations.append(
                Violation("shape_requires_point", "channels.shape", f"shape channel is not legal for mark {resolved_mark!r}")
            )

    if spec.mark == "table":
        try:
            values = parse_table_values(spec)
        except SchemaViolation as exc:
            violations.append(Violation("table_values_invalid", exc.path, exc.reason))
        else:
            if not values:
                violations.append(
                    Violation("table_values_missing", f"config.style.{TABLE_VALUES_KEY}", "table mark requires at least one measure")
                )
            for i, ref in enumerate(values):
                check_ref(ref, f"config.style.{TABLE_VALUES_KEY}[{i}]")
                if ref.aggregation == "none":
                    violations.append(
                        Violation(
                            "table_values_invalid",
                            f"config.style.{TABLE_VALUES_KEY}[{i}]",
                            "table values must carry an aggregation",
                        )
                    )

    return violations


def with_name(spec: ChartSpec, name: str) -> ChartSpec:
    return replace(spec, name=name)
