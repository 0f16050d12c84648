"""Command-line front door: serve, run, sql, infer.

Exit codes: 0 success, 1 usage error, 2 data/spec error. Data goes to
stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import derive, engine, render, sqlgen
from .errors import WalkdError
from .server import Registry, create_app
from .spec_model import default_mark, parse_spec, validate_against
from .table_store import Dataset, infer_fields, load_csv, load_json_rows
from .workflow import workflow_from_json

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _load_data_file(path: str) -> Dataset:
    name = os.path.splitext(os.path.basename(path))[0]
    try:
        with open(path, "rb") as fh:
            payload = fh.read()
    except OSError as exc:
        raise WalkdError(f"cannot read {path}: {exc}") from None
    if path.endswith(".json"):
        rows = json.loads(payload.decode("utf-8"))
        return load_json_rows(rows, name=name)
    return load_csv(payload, name=name)


def _load_spec_file(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_spec(fh.read())
    except OSError as exc:
        raise WalkdError(f"cannot read {path}: {exc}") from None


def _require_valid(spec, fields):
    violations = validate_against(spec, fields)
    if violations:
        lines = "; ".join(f"{v.code} at {v.path}: {v.message}" for v in violations)
        raise WalkdError(f"spec does not validate: {lines}")


def _cmd_serve(args) -> int:
    port = args.port if args.port is not None else int(os.environ.get("WALKD_PORT", "8787"))
    if not 0 < port < 65536:
        print(f"walkd: error: port {port} out of range", file=sys.stderr)
        return USAGE_ERROR
    spec_dir = args.spec_dir or os.environ.get("WALKD_SPEC_DIR")
    registry = Registry()
    for path in args.data or []:
        dataset = _load_data_file(path)
        entry = registry.add(dataset)
        print(
            f"dataset {dataset.name} id={entry.dataset.id} fields={len(entry.fields)}",
            file=sys.stderr,
        )
    ui_dir = args.ui_dir
    if ui_dir is None:
        bundled = os.path.join(os.path.dirname(__file__), "..", "..", "frontend", "dist")
        ui_dir = bundled if os.path.isdir(bundled) else None
    app = create_app(registry=registry, spec_dir=spec_dir, ui_dir=ui_dir)

    import uvicorn

    try:
        uvicorn.run(app, host=args.host, port=port, log_level="warning")
    except SystemExit as exc:
        # uvicorn exits 3 on startup failure (port busy etc.)
        if exc.code:
            raise WalkdError(f"server failed to start on port {port}") from None
    except OSError as exc:
        raise WalkdError(f"cannot listen on port {port}: {exc}") from None
    return 0


def _cmd_run(args) -> int:
    dataset = _load_data_file(args.data)
    fields = infer_fields(dataset)
    spec = _load_spec_file(args.spec)
    _require_valid(spec, fields)

    if args.format == "view":
        if default_mark(spec, fields) == "table":
            plan = derive.derive_pivot(spec, fields)
            tables = engine.execute_pivot(plan, dataset, fields)
            payload = json.dumps({"rollups": [t.to_json() for t in tables]})
        else:
            workflow = derive.derive_workflow(spec, fields)
            table = engine.execute(workflow, dataset, fields)
            payload = json.dumps(table.to_json())
    else:
        if default_mark(spec, fields) == "table":
            plan = derive.derive_pivot(spec, fields)
            tables = engine.execute_pivot(plan, dataset, fields)
            payload = json.dumps(render.to_pivot(plan, tables).to_json())
        else:
            workflow = derive.derive_workflow(spec, fields)
            facets = derive.derive_facets(spec, fields)
            table = engine.execute(workflow, dataset, fields)
            payload = render.chart_json(render.to_chart(spec, facets, table, fields))

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        print(payload)
    return 0


def _cmd_sql(args) -> int:
    if args.workflow:
        with open(args.workflow, encoding="utf-8") as fh:
            workflow = workflow_from_json(json.load(fh))
    else:
        spec = _load_spec_file(args.spec)
        if not args.data:
            raise WalkdError("--data is required with --spec to resolve field types")
        dataset = _load_data_file(args.data)
        fields = infer_fields(dataset)
        _require_valid(spec, fields)
        workflow = derive.derive_workflow(spec, fields)
    query = sqlgen.compile_sql(workflow, args.table, args.dialect)
    if args.json:
        print(json.dumps(query.to_json()))
    else:
        print(query.text)
    return 0


def _cmd_infer(args) -> int:
    dataset = _load_data_file(args.data)
    fields = infer_fields(dataset)
    if args.json:
        print(json.dumps({"id": dataset.id, "fields": [f.to_json() for f in fields]}))
        return 0
    headers = ("fid", "name", "semantic", "analytic", "distinct", "min", "max")
    rows = [
        (
            f.fid,
            f.name,
            f.semantic_type,
            f.analytic_type,
            str(f.distinct_count),
            "" if f.min is None else str(f.min),
            "" if f.max is None else str(f.max),
        )
        for f in fields
    ]
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) if rows else len(headers[i]) for i in range(len(headers))]
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)))
    for row in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="walkd", description="chart-spec engine: serve, run, compile, inspect")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="serve the HTTP API and UI bundle")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--data", action="append", metavar="FILE")
    serve.add_argument("--spec-dir", default=None)
    serve.add_argument("--ui-dir", default=None)
    serve.set_defaults(fn=_cmd_serve)

    run = sub.add_parser("run", help="execute a spec headlessly")
    run.add_argument("--data", required=True)
    run.add_argument("--spec", required=True)
    run.add_argument("--out", default=None)
    run.add_argument("--format", choices=("view", "chart"), default="chart")
    run.set_defaults(fn=_cmd_run)

    sql = sub.add_parser("sql", help="compile a spec or workflow to SQL")
    group = sql.add_mutually_exclusive_group(required=True)
    group.add_argument("--spec")
    group.add_argument("--workflow")
    sql.add_argument("--data", default=None, help="data file for field types (required with --spec)")
    sql.add_argument("--table", required=True)
    sql.add_argument("--dialect", choices=sqlgen.DIALECTS, default="ansi")
    sql.add_argument("--json", action="store_true")
    sql.set_defaults(fn=_cmd_sql)

    infer = sub.add_parser("infer", help="print inferred field metadata")
    infer.add_argument("--data", required=True)
    infer.add_argument("--json", action="store_true")
    infer.set_defaults(fn=_cmd_infer)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except WalkdError as exc:
        print(f"walkd: error: {exc.message or exc}", file=sys.stderr)
        return DATA_ERROR
    except json.JSONDecodeError as exc:
        print(f"walkd: error: invalid JSON: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
