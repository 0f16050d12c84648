"""Write the scenario spec fixtures and golden SQL in canonical form."""

from __future__ import annotations

from pathlib import Path

from walkd.derive import derive_workflow
from walkd.spec_model import (
    ChartSpec,
    FieldRef,
    Filter,
    SpecConfig,
    serialize_spec,
)
from walkd.sqlgen import compile_sql
from walkd.table_store import infer_fields, load_csv

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def scenario_line() -> ChartSpec:
    return ChartSpec(
        name="Sales by Year per Region",
        mark="line",
        aggregated=True,
        channels={
            "x": (FieldRef("year"),),
            "y": (FieldRef("region"), FieldRef("sales", "sum")),
        },
    )


def scenario_bar() -> ChartSpec:
    return ChartSpec(
        name="North Asia by Category",
        mark="bar",
        aggregated=True,
        channels={
            "x": (FieldRef("year"),),
            "y": (FieldRef("sales", "sum"),),
            "color": (FieldRef("category"),),
        },
        filters=(Filter("region", one_of=("North Asia",)),),
    )


def scenario_pivot() -> ChartSpec:
    return ChartSpec(
        name="Furniture Sales by City",
        mark="table",
        aggregated=True,
        channels={
            "x": (FieldRef("country"), FieldRef("city")),
            "y": (FieldRef("year"),),
        },
        filters=(
            Filter("region", one_of=("North Asia",)),
            Filter("category", one_of=("Furniture",)),
        ),
        config=SpecConfig(style={"table_values": [{"fid": "sales", "aggregation": "sum"}]}),
    )


def scenario_scatter() -> ChartSpec:
    return ChartSpec(
        name="Profit vs Sales",
        mark="point",
        aggregated=False,
        channels={
            "x": (FieldRef("sales"),),
            "y": (FieldRef("profit"),),
            "color": (FieldRef("category"),),
        },
    )


def empty_spec() -> ChartSpec:
    return ChartSpec(name="Chart 1")


SPECS = {
    "scenario_line": scenario_line,
    "scenario_bar": scenario_bar,
    "scenario_pivot": scenario_pivot,
    "scenario_scatter": scenario_scatter,
    "empty": empty_spec,
}


def main():
    specs_dir = FIXTURES / "specs"
    golden_dir = FIXTURES / "golden"
    specs_dir.mkdir(parents=True, exist_ok=True)
    golden_dir.mkdir(parents=True, exist_ok=True)

    for name, build in SPECS.items():
        (specs_dir / f"{name}.json").write_text(serialize_spec(build()), encoding="utf-8")

    with open(FIXTURES / "superstore.csv", "rb") as fh:
        dataset = load_csv(fh.read(), name="superstore")
    fields = infer_fields(dataset)
    workflow = derive_workflow(scenario_line(), fields)
    for dialect in ("ansi", "duckdb"):
        query = compile_sql(workflow, "superstore", dialect)
        (golden_dir / f"scenario_line.{dialect}.sql").write_text(query.text + "\n", encoding="utf-8")
    bar_wf = derive_workflow(scenario_bar(), fields)
    for dialect in ("ansi", "duckdb"):
        query = compile_sql(bar_wf, "superstore", dialect)
        (golden_dir / f"scenario_bar.{dialect}.sql").write_text(query.text + "\n", encoding="utf-8")
    print(f"wrote {len(SPECS)} specs and 4 golden SQL files")


if __name__ == "__main__":
    main()
