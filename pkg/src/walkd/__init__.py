"""walkd: declarative chart specs compiled to workflows, SQL, and Vega-Lite."""

from .derive import FacetPlan, PivotPlan, derive_facets, derive_pivot, derive_workflow
from .engine import ViewTable, apply_transform, execute, execute_pivot
from .render import PivotModel, export_html, to_chart, to_pivot
from .spec_model import (
    ChartSpec,
    ComputedField,
    FieldRef,
    Filter,
    SortRule,
    SpecConfig,
    default_mark,
    parse_spec,
    serialize_spec,
    validate_against,
)
from .sqlgen import SqlQuery, compile_sql, compile_transform_sql, quote_ident, quote_literal
from .table_store import (
    Column,
    Dataset,
    FieldMeta,
    infer_fields,
    load_csv,
    load_json_rows,
)
from .workflow import Workflow, workflow_from_json, workflow_to_json

__version__ = "0.1.0"

__all__ = [
    "ChartSpec",
    "Column",
    "ComputedField",
    "Dataset",
    "FacetPlan",
    "FieldMeta",
    "FieldRef",
    "Filter",
    "PivotModel",
    "PivotPlan",
    "SortRule",
    "SpecConfig",
    "SqlQuery",
    "ViewTable",
    "Workflow",
    "apply_transform",
    "compile_sql",
    "compile_transform_sql",
    "default_mark",
    "derive_facets",
    "derive_pivot",
    "derive_workflow",
    "execute",
    "execute_pivot",
    "export_html",
    "infer_fields",
    "load_csv",
    "load_json_rows",
    "parse_spec",
    "quote_ident",
    "quote_literal",
    "serialize_spec",
    "to_chart",
    "to_pivot",
    "validate_against",
    "workflow_from_json",
    "workflow_to_json",
]
