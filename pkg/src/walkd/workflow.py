"""Computation workflow: ordered filter / transform / view / sort steps.

A Workflow is the execution-facing description derived from a chart spec.
Step order is fixed; each kind appears at most once; the view step is
always present. The JSON form (step-tagged objects) is the wire format
between server and clients.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SchemaViolation
from .spec_model import ComputedField

STORAGE_KINDS = ("float64", "utf8", "temporal")


@dataclass(frozen=True)
class FilterClause:
    """One predicate; kind is the column's storage kind (temporal values
    are epoch millis so both backends compare the same scalars)."""

    fid: str
    kind: str
    one_of: tuple | None = None
    range: tuple | None = None

    def to_json(self) -> dict:
        doc = {"fid": self.fid, "kind": self.kind}
        if self.one_of is not None:
            doc["one_of"] = list(self.one_of)
        else:
            doc["range"] = list(self.range)
        return doc


@dataclass(frozen=True)
class FilterStep:
    filters: tuple[FilterClause, ...]


@dataclass(frozen=True)
class TransformStep:
    computed: tuple[ComputedField, ...]


@dataclass(frozen=True)
class Measure:
    fid: str
    aggregation: str
    out_fid: str

    def to_json(self) -> dict:
        return {"fid": self.fid, "aggregation": self.aggregation, "out_fid": self.out_fid}


@dataclass(frozen=True)
class ViewStep:
    mode: str  # aggregate | raw
    group_by: tuple[str, ...] = ()
    measures: tuple[Measure, ...] = ()
    fids: tuple[str, ...] = ()  # raw mode projection


@dataclass(frozen=True)
class SortStep:
    by: str
    direction: str  # asc | desc


@dataclass(frozen=True)
class Workflow:
    view: ViewStep
    filter: FilterStep | None = None
    transform: TransformStep | None = None
    sort: SortStep | None = None

    @property
    def steps(self) -> list:
        """Steps in execution order (absent steps skipped)."""
        out: list = []
        if self.filter is not None:
            out.append(self.filter)
        if self.transform is not None:
            out.append(self.transform)
        out.append(self.view)
        if self.sort is not None:
            out.append(self.sort)
        return out

    @property
    def output_fids(self) -> tuple[str, ...]:
        """Column fids of the view this workflow produces, in order."""
        if self.view.mode == "aggregate":
            return self.view.group_by + tuple(m.out_fid for m in self.view.measures)
        return self.view.fids


def workflow_to_json(workflow: Workflow) -> dict:
    steps: list[dict] = []
    if workflow.filter is not None:
        steps.append({"type": "filter", "filters": [f.to_json() for f in workflow.filter.filters]})
    if workflow.transform is not None:
        steps.append({"type": "transform", "computed": [c.to_json() for c in workflow.transform.computed]})
    if workflow.view.mode == "aggregate":
        steps.append(
            {
                "type": "view",
                "mode": "aggregate",
                "group_by": list(workflow.view.group_by),
                "measures": [m.to_json() for m in workflow.view.measures],
            }
        )
    else:
        steps.append({"type": "view", "mode": "raw", "fids": list(workflow.view.fids)})
    if workflow.sort is not None:
        steps.append({"type": "sort", "by": workflow.sort.by, "direction": workflow.sort.direction})
    return {"steps": steps}


def _expect(cond: bool, path: str, reason: str):
    if not cond:
        raise SchemaViolation(path, reason)


def workflow_from_json(doc) -> Workflow:
    """Parse the step-tagged JSON form back into a Workflow."""
    _expect(isinstance(doc, dict) and isinstance(doc.get("steps"), list), "$", "workflow must hold a steps array")
    filter_step = transform_step = view_step = sort_step = None
    order = {"filter": 0, "transform": 1, "view": 2, "sort": 3}
    last = -1
    for i, step in enumerate(doc["steps"]):
        path = f"steps[{i}]"
        _expect(isinstance(step, dict), path, "step must be an object")
        kind = step.get("type")
        _expect(kind in order, f"{path}.type", f"unknown step type {kind!r}")
        _expect(order[kind] > last, path, "steps out of order or duplicated")
        last = order[kind]
        if kind == "filter":
            clauses = []
            for j, f in enumerate(step.get("filters", [])):
                fpath = f"{path}.filters[{j}]"
                _expect(isinstance(f, dict) and isinstance(f.get("fid"), str), fpath, "bad filter")
                _expect(f.get("kind") in STORAGE_KINDS, fpath, "bad storage kind")
                if "one_of" in f:
                    _expect(isinstance(f["one_of"], list) and f["one_of"], fpath, "one_of must be non-empty")
                    clauses.append(FilterClause(f["fid"], f["kind"], one_of=tuple(f["one_of"])))
                else:
                    rng = f.get("range")
                    _expect(isinstance(rng, list) and len(rng) == 2, fpath, "range must be [lo, hi]")
                    clauses.append(FilterClause(f["fid"], f["kind"], range=(rng[0], rng[1])))
            filter_step = FilterStep(tuple(clauses))
        elif kind == "transform":
            computed = []
            for j, c in enumerate(step.get("computed", [])):
                cpath = f"{path}.computed[{j}]"
                _expect(
                    isinstance(c, dict)
                    and isinstance(c.get("out_fid"), str)
                    and isinstance(c.get("source_fid"), str)
                    and c.get("kind") in ("log2", "log10", "bin"),
                    cpath,
                    "bad computed field",
                )
                if c["kind"] == "bin":
                    _expect(isinstance(c.get("k"), int) and c["k"] > 0, cpath, "bin requires positive k")
                    computed.append(ComputedField(c["out_fid"], c["source_fid"], "bin", c["k"]))
                else:
                    computed.append(ComputedField(c["out_fid"], c["source_fid"], c["kind"]))
            transform_step = TransformStep(tuple(computed))
        elif kind == "view":
            mode = step.get("mode")
            _expect(mode in ("aggregate", "raw"), f"{path}.mode", "mode must be aggregate or raw")
            if mode == "aggregate":
                group_by = step.get("group_by", [])
                _expect(isinstance(group_by, list), f"{path}.group_by", "group_by must be an array")
                measures = []
                for j, m in enumerate(step.get("measures", [])):
                    mpath = f"{path}.measures[{j}]"
                    _expect(
                        isinstance(m, dict)
                        and isinstance(m.get("fid"), str)
                        and isinstance(m.get("aggregation"), str)
                        and isinstance(m.get("out_fid"), str),
                        mpath,
                        "bad measure",
                    )
                    measures.append(Measure(m["fid"], m["aggregation"], m["out_fid"]))
                view_step = ViewStep("aggregate", group_by=tuple(group_by), measures=tuple(measures))
            else:
                fids = step.get("fids", [])
                _expect(isinstance(fids, list), f"{path}.fids", "fids must be an array")
                view_step = ViewStep("raw", fids=tuple(fids))
        else:
            _expect(isinstance(step.get("by"), str), f"{path}.by", "sort needs a column")
            _expect(step.get("direction") in ("asc", "desc"), f"{path}.direction", "bad direction")
            sort_step = SortStep(step["by"], step["direction"])
    _expect(view_step is not None, "$", "a view step is required")
    return Workflow(view=view_step, filter=filter_step, transform=transform_step, sort=sort_step)
