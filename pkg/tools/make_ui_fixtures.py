"""Freeze real server responses as fixtures for the frontend test suite."""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from walkd.server import create_app

REPO = Path(__file__).resolve().parent.parent
OUT = REPO / "frontend" / "tests" / "fixtures"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app())
    upload = client.post(
        "/api/datasets?name=superstore",
        content=(REPO / "fixtures" / "superstore.csv").read_bytes(),
        headers={"content-type": "text/csv"},
    )
    upload.raise_for_status()
    ds = upload.json()
    (OUT / "fields.json").write_text(json.dumps(ds["fields"], indent=1), encoding="utf-8")

    def spec(name: str) -> dict:
        return json.loads((REPO / "fixtures" / "specs" / f"{name}.json").read_text())

    line_query = client.post(f"/api/datasets/{ds['id']}/query", json=spec("scenario_line"))
    line_query.raise_for_status()
    (OUT / "query_line.json").write_text(json.dumps(line_query.json(), indent=1), encoding="utf-8")

    pivot_query = client.post(f"/api/datasets/{ds['id']}/query", json=spec("scenario_pivot"))
    pivot_query.raise_for_status()
    (OUT / "query_pivot.json").write_text(json.dumps(pivot_query.json(), indent=1), encoding="utf-8")

    pivot_render = client.post(f"/api/datasets/{ds['id']}/render", json=spec("scenario_pivot"))
    pivot_render.raise_for_status()
    (OUT / "render_pivot.json").write_text(json.dumps(pivot_render.json(), indent=1), encoding="utf-8")

    line_render = client.post(f"/api/datasets/{ds['id']}/render", json=spec("scenario_line"))
    line_render.raise_for_status()
    (OUT / "render_line.json").write_text(json.dumps(line_render.json(), indent=1), encoding="utf-8")
    print(f"wrote fixtures to {OUT}")


if __name__ == "__main__":
    main()
