"""HTTP service: dataset registry, query/render/compile endpoints, spec store.

Datasets are immutable once registered; the registry is the only mutable
structure and is lock-guarded. All engine calls are pure, so request
handlers can run concurrently without per-dataset locking.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import derive, engine, render, sqlgen
from .errors import WalkdError
from .spec_model import (
    ChartSpec,
    default_mark,
    parse_spec,
    serialize_spec,
    spec_from_jsonable,
    validate_against,
)
from .table_store import Dataset, FieldMeta, infer_fields, load_csv, load_json_rows
from .workflow import workflow_from_json, workflow_to_json

DEFAULT_DATA_CAP_BYTES = 256 * 1024 * 1024
DEFAULT_ROW_CAP = 5_000_000

_SPEC_NAME = re.compile(r"^[A-Za-z0-9._ -]{1,128}$")


@dataclass
class Entry:
    dataset: Dataset
    fields: list[FieldMeta]


class Registry:
    """id -> dataset + inferred fields; safe for concurrent insert/lookup."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: dict[str, Entry] = {}
        self._counter = 0

    def add(self, dataset: Dataset, fields: list[FieldMeta] | None = None) -> Entry:
        with self._lock:
            self._counter += 1
            ds_id = f"ds_{self._counter}"
            entry = Entry(
                dataset=Dataset(ds_id, dataset.name, dataset.columns, dataset.row_count),
                fields=fields if fields is not None else infer_fields(dataset),
            )
            self._entries[ds_id] = entry
            return entry

    def get(self, ds_id: str) -> Entry | None:
        with self._lock:
            return self._entries.get(ds_id)

    def items(self) -> list[tuple[str, Entry]]:
        with self._lock:
            return list(self._entries.items())

    def sole_entry(self) -> Entry | None:
        with self._lock:
            if len(self._entries) == 1:
                return next(iter(self._entries.values()))
        return None


class SpecStore:
    """Named canonical spec documents, optionally persisted to a directory."""

    def __init__(self, directory: str | None = None):
        self._lock = threading.Lock()
        self._memory: dict[str, str] = {}
        self._dir = directory
        if directory:
            os.makedirs(directory, exist_ok=True)

    def _path(self, name: str) -> str:
        return os.path.join(self._dir, f"{name}.json")

    def put(self, name: str, text: str):
        with self._lock:
            if self._dir:
                with open(self._path(name), "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                self._memory[name] = text

    def get(self, name: str) -> str | None:
        with self._lock:
            if self._dir:
                try:
                    with open(self._path(name), encoding="utf-8") as fh:
                        return fh.read()
                except FileNotFoundError:
                    return None
            return self._memory.get(name)

    def names(self) -> list[str]:
        with self._lock:
            if self._dir:
                return sorted(
                    f[: -len(".json")] for f in os.listdir(self._dir) if f.endswith(".json")
                )
            return sorted(self._memory)


def _error(status: int, code: str, message: str, details: list | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "details": details or []},
    )


def _spec_or_response(body) -> ChartSpec | JSONResponse:
    try:
        return spec_from_jsonable(body)
    except WalkdError as exc:
        return _error(422, exc.code, exc.message)


def create_app(
    registry: Registry | None = None,
    spec_dir: str | None = None,
    data_cap_bytes: int = DEFAULT_DATA_CAP_BYTES,
    row_cap: int = DEFAULT_ROW_CAP,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="walkd", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.registry = registry or Registry()
    specs = SpecStore(spec_dir)

    reg: Registry = app.state.registry

    @app.post("/api/datasets")
    async def upload_dataset(request: Request, name: str = "dataset"):
        body = await request.body()
        if len(body) > data_cap_bytes:
            return _error(413, "payload_too_large", f"body exceeds {data_cap_bytes} bytes; use the SQL path")
        content_type = request.headers.get("content-type", "")
        try:
            if content_type.startswith("application/json"):
                rows = json.loads(body)
                if not isinstance(rows, list):
                    return _error(400, "bad_request", "JSON body must be an array of row objects")
                dataset = load_json_rows(rows, name=name)
            elif content_type.startswith("multipart/form-data"):
                form = await request.form()
                upload = form.get("file")
                if upload is None:
                    return _error(400, "bad_request", "multipart body needs a 'file' field")
                payload = await upload.read()
                if len(payload) > data_cap_bytes:
                    return _error(413, "payload_too_large", f"file exceeds {data_cap_bytes} bytes")
                if name == "dataset" and getattr(upload, "filename", None):
                    name = os.path.splitext(os.path.basename(upload.filename))[0]
                dataset = load_csv(payload, name=name)
            else:
                dataset = load_csv(body, name=name)
        except json.JSONDecodeError as exc:
            return _error(400, "json_syntax", str(exc))
        except WalkdError as exc:
            return _error(400, exc.code, exc.message)
        if dataset.row_count > row_cap:
            return _error(413, "too_many_rows", f"dataset exceeds {row_cap} rows; use the SQL path")
        entry = reg.add(dataset)
        return {"id": entry.dataset.id, "fields": [f.to_json() for f in entry.fields]}

    @app.get("/api/datasets")
    def list_datasets():
        return {
            "datasets": [
                {"id": ds_id, "name": e.dataset.name, "row_count": e.dataset.row_count}
                for ds_id, e in reg.items()
            ]
        }

    @app.get("/api/datasets/{ds_id}")
    def dataset_info(ds_id: str):
        entry = reg.get(ds_id)
        if entry is None:
            return _error(404, "unknown_dataset", f"no dataset {ds_id!r}")
        return {
            "id": ds_id,
            "name": entry.dataset.name,
            "row_count": entry.dataset.row_count,
            "fields": [f.to_json() for f in entry.fields],
        }

    @app.get("/api/datasets/{ds_id}/rows")
    def dataset_rows(ds_id: str, limit: int = 100):
        entry = reg.get(ds_id)
        if entry is None:
            return _error(404, "unknown_dataset", f"no dataset {ds_id!r}")
        preview = engine.dataset_preview(entry.dataset, entry.fields, limit=max(0, limit))
        return preview.to_json()

    def _prepare(ds_id: str, body) -> tuple | JSONResponse:
        entry = reg.get(ds_id)
        if entry is None:
            return _error(404, "unknown_dataset", f"no dataset {ds_id!r}")
        spec = _spec_or_response(body)
        if isinstance(spec, JSONResponse):
            return spec
        violations = validate_against(spec, entry.fields)
        if violations:
            return _error(
                422,
                "validation_failed",
                "spec does not validate against the dataset",
                [v.to_json() for v in violations],
            )
        return entry, spec

    @app.post("/api/datasets/{ds_id}/query")
    async def query_dataset(ds_id: str, request: Request):
        prepared = _prepare(ds_id, await request.json())
        if isinstance(prepared, JSONResponse):
            return prepared
        entry, spec = prepared
        try:
            if default_mark(spec, entry.fields) == "table":
                plan = derive.derive_pivot(spec, entry.fields)
                tables = engine.execute_pivot(plan, entry.dataset, entry.fields)
                return {
                    "rollups": [t.to_json() for t in tables],
                    "workflows": [workflow_to_json(wf) for wf in plan.rollups],
                }
            workflow = derive.derive_workflow(spec, entry.fields)
            table = engine.execute(workflow, entry.dataset, entry.fields)
            doc = table.to_json()
            doc["workflow"] = workflow_to_json(workflow)
            return doc
        except WalkdError as exc:
            return _error(422, exc.code, exc.message)

    @app.post("/api/datasets/{ds_id}/render")
    async def render_dataset(ds_id: str, request: Request):
        prepared = _prepare(ds_id, await request.json())
        if isinstance(prepared, JSONResponse):
            return prepared
        entry, spec = prepared
        try:
            artifact = render_spec(spec, entry)
        except WalkdError as exc:
            return _error(422, exc.code, exc.message)
        if isinstance(artifact, render.PivotModel):
            return {"kind": "pivot", "pivot": artifact.to_json()}
        return {"kind": "chart", "chart": artifact}

    @app.post("/api/compile/sql")
    async def compile_sql_endpoint(request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            return _error(400, "bad_request", "body must be an object")
        dialect = body.get("dialect", "ansi")
        if dialect not in sqlgen.DIALECTS:
            return _error(400, "unknown_dialect", f"dialect must be one of {list(sqlgen.DIALECTS)}")
        table = body.get("table")
        if not isinstance(table, str):
            return _error(400, "bad_request", "table is required")
        try:
            if "workflow" in body:
                workflow = workflow_from_json(body["workflow"])
            elif "spec" in body:
                spec = _spec_or_response(body["spec"])
                if isinstance(spec, JSONResponse):
                    return spec
                entry = reg.get(body.get("dataset_id", "")) or reg.sole_entry()
                if entry is None:
                    return _error(400, "bad_request", "spec bodies need dataset_id to resolve field types")
                violations = validate_against(spec, entry.fields)
                if violations:
                    return _error(422, "validation_failed", "invalid spec", [v.to_json() for v in violations])
                workflow = derive.derive_workflow(spec, entry.fields)
            else:
                return _error(400, "bad_request", "body needs spec or workflow")
            query = sqlgen.compile_sql(workflow, table, dialect)
        except WalkdError as exc:
            return _error(422, exc.code, exc.message)
        return {"sql": query.text, "output_fields": list(query.output_fields), "dialect": dialect}

    @app.put("/api/specs/{name}")
    async def put_spec(name: str, request: Request):
        if not _SPEC_NAME.match(name):
            return _error(400, "bad_name", "spec names are limited to letters, digits, '._ -'")
        text = (await request.body()).decode("utf-8", errors="replace")
        try:
            spec = parse_spec(text)
        except WalkdError as exc:
            return _error(422, exc.code, exc.message)
        specs.put(name, serialize_spec(spec))
        return {"name": name}

    @app.get("/api/specs")
    def list_specs():
        return {"names": specs.names()}

    @app.get("/api/specs/{name}")
    def get_spec(name: str):
        text = specs.get(name)
        if text is None:
            return _error(404, "unknown_spec", f"no spec {name!r}")
        return Response(content=text, media_type="application/json")

    @app.get("/api/export/html")
    def export_html_endpoint(specs_csv: str = Query("", alias="specs"), dataset: str = ""):
        names = [n for n in specs_csv.split(",") if n]
        tabs = []
        entry = reg.get(dataset) if dataset else reg.sole_entry()
        for spec_name in names:
            text = specs.get(spec_name)
            if text is None:
                return _error(404, "unknown_spec", f"no spec {spec_name!r}")
            spec = parse_spec(text)
            if entry is None:
                return _error(400, "bad_request", "no dataset available to render against")
            try:
                tabs.append((spec, render_spec(spec, entry)))
            except WalkdError as exc:
                return _error(422, exc.code, exc.message)
        return HTMLResponse(render.export_html(tabs))

    if ui_dir and os.path.isdir(ui_dir):
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def render_spec(spec: ChartSpec, entry: Entry):
    """Spec -> ChartDoc dict or PivotModel for a registered dataset."""
    if default_mark(spec, entry.fields) == "table":
        plan = derive.derive_pivot(spec, entry.fields)
        tables = engine.execute_pivot(plan, entry.dataset, entry.fields)
        return render.to_pivot(plan, tables)
    workflow = derive.derive_workflow(spec, entry.fields)
    facets = derive.derive_facets(spec, entry.fields)
    table = engine.execute(workflow, entry.dataset, entry.fields)
    return render.to_chart(spec, facets, table, entry.fields)
