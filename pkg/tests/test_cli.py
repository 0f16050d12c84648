from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
import urllib.request

from conftest import FIXTURES
from walkd.cli import main

SUPERSTORE = str(FIXTURES / "superstore.csv")
LINE_SPEC = str(FIXTURES / "specs" / "scenario_line.json")


def run_cli(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "walkd.cli", *argv],
        capture_output=True,
        text=True,
        timeout=60,
    )
    return proc


class TestInfer:
    def test_table_output(self):
        proc = run_cli("infer", "--data", SUPERSTORE)
        assert proc.returncode == 0
        assert "order_date" in proc.stdout
        assert "temporal" in proc.stdout

    def test_json_output(self):
        proc = run_cli("infer", "--data", SUPERSTORE, "--json")
        body = json.loads(proc.stdout)
        by_fid = {f["fid"]: f for f in body["fields"]}
        assert by_fid["year"]["semantic_type"] == "ordinal"
        assert by_fid["sales"]["analytic_type"] == "measure"

    def test_missing_file_is_exit_2(self, tmp_path):
        proc = run_cli("infer", "--data", str(tmp_path / "nope.csv"))
        assert proc.returncode == 2

    def test_empty_csv_is_exit_2(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_bytes(b"")
        proc = run_cli("infer", "--data", str(empty))
        assert proc.returncode == 2


class TestRun:
    def test_chart_output_schema_valid(self, tmp_path, vega_validator):
        out = tmp_path / "chart.json"
        proc = run_cli("run", "--data", SUPERSTORE, "--spec", LINE_SPEC, "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        doc = json.loads(out.read_text())
        assert not list(vega_validator.iter_errors(doc))

    def test_view_format(self):
        proc = run_cli("run", "--data", SUPERSTORE, "--spec", LINE_SPEC, "--format", "view")
        assert proc.returncode == 0
        body = json.loads(proc.stdout)
        assert [f["fid"] for f in body["fields"]] == ["year", "region", "sales_sum"]

    def test_deterministic_output(self, tmp_path):
        outs = []
        for i in range(2):
            out = tmp_path / f"o{i}.json"
            assert run_cli("run", "--data", SUPERSTORE, "--spec", LINE_SPEC, "--out", str(out)).returncode == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_invalid_spec_is_exit_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        spec = json.loads((FIXTURES / "specs" / "scenario_line.json").read_text())
        spec["channels"]["x"] = [{"fid": "salez"}]
        bad.write_text(json.dumps(spec))
        proc = run_cli("run", "--data", SUPERSTORE, "--spec", str(bad))
        assert proc.returncode == 2
        assert "unresolved_field" in proc.stderr


class TestSql:
    def test_golden_scenario(self, golden):
        proc = run_cli("sql", "--spec", LINE_SPEC, "--data", SUPERSTORE, "--table", "superstore")
        assert proc.returncode == 0
        assert proc.stdout == golden("scenario_line.ansi.sql")

    def test_bad_dialect_is_usage_error(self):
        proc = run_cli("sql", "--spec", LINE_SPEC, "--data", SUPERSTORE, "--table", "t", "--dialect", "foo")
        assert proc.returncode == 1

    def test_workflow_input(self, tmp_path):
        wf = {
            "steps": [
                {
                    "type": "view",
                    "mode": "aggregate",
                    "group_by": ["region"],
                    "measures": [{"fid": "sales", "aggregation": "sum", "out_fid": "sales_sum"}],
                }
            ]
        }
        path = tmp_path / "wf.json"
        path.write_text(json.dumps(wf))
        proc = run_cli("sql", "--workflow", str(path), "--table", "t")
        assert proc.returncode == 0
        assert proc.stdout.strip() == 'SELECT "region", SUM("sales") AS "sales_sum" FROM "t" GROUP BY "region"'

    def test_spec_without_data_is_exit_2(self):
        proc = run_cli("sql", "--spec", LINE_SPEC, "--table", "t")
        assert proc.returncode == 2


class TestServe:
    def test_bad_port_is_usage_error(self):
        assert main(["serve", "--port", "70000"]) == 1

    def test_busy_port_is_exit_2(self):
        with socket.socket() as blocker:
            blocker.bind(("127.0.0.1", 0))
            blocker.listen(1)
            port = blocker.getsockname()[1]
            proc = run_cli("serve", "--port", str(port))
            assert proc.returncode == 2

    def test_no_subcommand_is_usage_error(self):
        proc = run_cli()
        assert proc.returncode == 1

    def test_serve_announces_datasets_and_serves(self, tmp_path):
        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            port = s.getsockname()[1]
        proc = subprocess.Popen(
            [sys.executable, "-m", "walkd.cli", "serve", "--port", str(port), "--data", SUPERSTORE],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        try:
            deadline = time.time() + 20
            body = None
            while time.time() < deadline:
                try:
                    with urllib.request.urlopen(f"http://127.0.0.1:{port}/api/datasets", timeout=1) as resp:
                        body = json.loads(resp.read())
                    break
                except OSError:
                    time.sleep(0.2)
            assert body is not None, "server did not come up"
            assert body["datasets"][0]["name"] == "superstore"
        finally:
            proc.terminate()
            _, stderr = proc.communicate(timeout=10)
        assert "dataset superstore id=ds_1 fields=21" in stderr
