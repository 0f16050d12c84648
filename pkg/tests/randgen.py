"""Seeded random tables, specs, and workflows for property/differential tests."""

from __future__ import annotations

import random
import string
from datetime import date, timedelta

from walkd.spec_model import (
    AGGREGATIONS,
    ChartSpec,
    ComputedField,
    FieldRef,
    Filter,
    SortRule,
    SpecConfig,
)
from walkd.table_store import infer_fields, load_json_rows

WORDS = ("north", "south", "east", "west", "alpha", "beta", "gamma", "delta", "o'hare", 'say "hi"')

MEASURE_AGGS = ("sum", "mean", "count", "min", "max", "median", "variance", "stddev", "count_distinct")


def random_table(rng: random.Random, max_rows: int = 50, max_cols: int = 6):
    """Raw row dicts + the ingested dataset + fields."""
    n_rows = rng.randint(1, max_rows)
    n_cols = rng.randint(2, max_cols)
    col_specs = []
    for i in range(n_cols):
        kind = rng.choice(("category", "category", "int_measure", "float_measure", "ordinal", "temporal"))
        col_specs.append((f"c{i}", kind))

    def cell(kind):
        if rng.random() < 0.08:
            return None
        if kind == "category":
            return rng.choice(WORDS[: rng.randint(2, len(WORDS))])
        if kind == "int_measure":
            return float(rng.randint(-1000, 5000))
        if kind == "float_measure":
            return round(rng.uniform(-50, 400), 3)
        if kind == "ordinal":
            return float(rng.randint(2010, 2015))
        start = date(2011, 1, 1) + timedelta(days=rng.randrange(0, 1400))
        return start.isoformat()

    raw_rows = []
    for _ in range(n_rows):
        row = {}
        for name, kind in col_specs:
            value = cell(kind)
            if value is not None:
                row[name] = value
        raw_rows.append(row)
    # guarantee every column appears at least once so ingestion sees it
    for name, kind in col_specs:
        if not any(name in r for r in raw_rows):
            forced = cell(kind)
            while forced is None:
                forced = cell(kind)
            raw_rows[rng.randrange(n_rows)][name] = forced

    dataset = load_json_rows(raw_rows, name="random")
    fields = infer_fields(dataset)
    return raw_rows, dataset, fields


def _pick_filter(rng: random.Random, dataset, fields) -> Filter | None:
    meta = rng.choice(fields)
    column = dataset.column(meta.name)
    present = column.non_null()
    if meta.semantic_type in ("quantitative", "ordinal", "temporal") and present and rng.random() < 0.5:
        lo, hi = sorted((rng.choice(present), rng.choice(present)))
        return Filter(meta.fid, range=(float(lo), float(hi)))
    pool = list({v for v in column.values})
    if not pool:
        return None
    values = rng.sample(pool, k=min(len(pool), rng.randint(1, 3)))
    if column.kind == "temporal":
        values = [float(v) if v is not None else None for v in values]
    return Filter(meta.fid, one_of=tuple(values))


def random_spec(rng: random.Random, dataset, fields, for_chart: bool = False) -> ChartSpec:
    """A spec that validates against the fields.

    for_chart keeps axis lists facet-compatible (dimensions before
    measures, measures on one axis only).
    """
    dims = [f for f in fields if f.analytic_type == "dimension"]
    measures = [f for f in fields if f.analytic_type == "measure"]
    aggregated = rng.random() < 0.7 if measures else True

    computed: list[ComputedField] = []
    if measures and rng.random() < 0.4:
        for i in range(rng.randint(1, 2)):
            source = rng.choice(measures)
            kind = rng.choice(("log2", "log10", "bin"))
            if kind == "bin":
                computed.append(ComputedField(f"t{i}", source.fid, "bin", rng.choice((2, 5, 10))))
            else:
                computed.append(ComputedField(f"t{i}", source.fid, kind))

    def dim_ref_pool():
        pool = [FieldRef(f.fid) for f in dims]
        pool += [FieldRef(c.out_fid) for c in computed if c.kind == "bin"]
        return pool

    def measure_ref(allow_count_dim: bool = True) -> FieldRef:
        choices = []
        for f in measures:
            choices.append((f.fid, rng.choice(MEASURE_AGGS if aggregated else ("none",))))
        for c in computed:
            if c.kind != "bin":
                choices.append((c.out_fid, rng.choice(MEASURE_AGGS if aggregated else ("none",))))
        if allow_count_dim and dims and rng.random() < 0.15 and aggregated:
            choices.append((rng.choice(dims).fid, "count"))
        fid, agg = rng.choice(choices)
        if aggregated and agg == "none":
            agg = "sum"
        return FieldRef(fid, agg)

    channels: dict = {}
    have_measures = bool(measures or any(c.kind != "bin" for c in computed))

    x_dims = rng.sample(dim_ref_pool(), k=min(len(dim_ref_pool()), rng.randint(0, 2))) if dims else []
    y_dims = rng.sample(dim_ref_pool(), k=min(len(dim_ref_pool()), rng.randint(0, 1))) if dims else []
    x_meas: list[FieldRef] = []
    y_meas: list[FieldRef] = []
    if have_measures:
        if for_chart:
            axis = rng.choice(("x", "y"))
            target = x_meas if axis == "x" else y_meas
            for _ in range(rng.randint(1, 2)):
                target.append(measure_ref())
            if axis == "x":
                x_dims = []
            else:
                y_dims = y_dims[:1]
        else:
            for _ in range(rng.randint(0, 2)):
                (x_meas if rng.random() < 0.5 else y_meas).append(measure_ref())

    x_list = tuple(dict.fromkeys(x_dims)) + tuple(dict.fromkeys(x_meas))
    y_list = tuple(dict.fromkeys(y_dims)) + tuple(dict.fromkeys(y_meas))
    if x_list:
        channels["x"] = x_list
    if y_list:
        channels["y"] = y_list
    if dims and rng.random() < 0.4:
        channels["color"] = (FieldRef(rng.choice(dims).fid),)

    filters = []
    for _ in range(rng.randint(0, 2)):
        flt = _pick_filter(rng, dataset, fields)
        if flt is not None:
            filters.append(flt)

    sort = None
    refs = [r for lst in channels.values() for r in lst]
    if refs and rng.random() < 0.5:
        ref = rng.choice(refs)
        sort = SortRule(ref.fid, rng.choice(("asc", "desc")))

    return ChartSpec(
        name="random",
        mark=rng.choice(("auto", "bar", "line", "point")) if for_chart else "auto",
        aggregated=aggregated,
        channels=channels,
        computed=tuple(computed),
        filters=tuple(filters),
        sort=sort,
        stack=rng.choice(("none", "stack")),
    )


def random_spec_document(rng: random.Random) -> ChartSpec:
    """A structurally-arbitrary spec (for serialization roundtrips only)."""

    def name():
        return "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(1, 6)))

    channels = {}
    for ch in ("x", "y"):
        refs = tuple(
            FieldRef(name(), rng.choice(AGGREGATIONS)) for _ in range(rng.randint(0, 3))
        )
        if refs:
            channels[ch] = refs
    for ch in ("color", "size", "shape", "opacity"):
        if rng.random() < 0.3:
            channels[ch] = (FieldRef(name(), rng.choice(("none", "count"))),)

    computed = []
    for i in range(rng.randint(0, 2)):
        kind = rng.choice(("log2", "log10", "bin"))
        computed.append(
            ComputedField(f"{name()}_{i}", name(), kind, rng.randint(1, 12) if kind == "bin" else None)
        )

    filters = []
    for _ in range(rng.randint(0, 3)):
        if rng.random() < 0.5:
            pool: list = [name() for _ in range(3)] + [None, 1.5, -3.0, 42.0, 'it"s', "o'k"]
            values = tuple(rng.sample(pool, k=rng.randint(1, 4)))
            filters.append(Filter(name(), one_of=values))
        else:
            lo, hi = sorted((round(rng.uniform(-100, 100), 3), round(rng.uniform(-100, 100), 3)))
            filters.append(Filter(name(), range=(lo, hi)))

    style: dict = {}
    if rng.random() < 0.5:
        style["theme"] = name()
    if rng.random() < 0.3:
        style["opacity_scale"] = [0.1, 0.9]

    return ChartSpec(
        name=name(),
        mark=rng.choice(("auto", "bar", "line", "area", "point", "circle", "tick", "rect", "arc", "text")),
        aggregated=rng.random() < 0.5,
        channels=channels,
        computed=tuple(computed),
        filters=tuple(filters),
        sort=SortRule(name(), rng.choice(("asc", "desc"))) if rng.random() < 0.4 else None,
        stack=rng.choice(("stack", "normalize", "none")),
        config=SpecConfig(
            coord=rng.choice(("generic", "geographic")),
            layout=None if rng.random() < 0.6 else (rng.randint(100, 900), rng.randint(80, 600)),
            palette=rng.choice(("default", "viridis", "tableau10")),
            style=style,
        ),
    )
