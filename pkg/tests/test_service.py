"""HTTP service endpoints."""

import json

import pytest
from fastapi.testclient import TestClient

from tellask import __version__
from tellask.service import create_app

COUNTER = """\
(declare-var x int 0 99)
(defproc count (v) (par (tell (= x v)) (next (call count (+ v 1)))))
(main (call count 1))
"""


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def ndjson(resp):
    return [json.loads(line) for line in resp.text.splitlines()]


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "name": "tellask", "version": __version__}


def test_run_streams_header_then_one_record_per_unit(client):
    resp = client.post("/run", json={"source": COUNTER, "units": 3, "seed": 7})
    assert resp.status_code == 200
    assert resp.headers["content-type"].startswith("application/x-ndjson")
    lines = ndjson(resp)
    assert lines[0] == {"seed": 7, "units": 3}
    records = lines[1:]
    assert [r["tu"] for r in records] == [0, 1, 2]
    assert [r["vars"]["x"] for r in records] == [1, 2, 3]
    assert all(set(r) == {"tu", "vars", "fired_asks", "scheduled"} for r in records)


def test_run_is_deterministic_for_a_seed(client):
    payload = {"source": COUNTER, "units": 4, "seed": 11}
    a = client.post("/run", json=payload).text
    b = client.post("/run", json=payload).text
    assert a == b


def test_run_timing_adds_elapsed(client):
    resp = client.post("/run", json={"source": COUNTER, "units": 1, "timing": True})
    rec = ndjson(resp)[1]
    assert "elapsed_us" in rec


def test_run_applies_input_script(client):
    source = "(declare-var x int 0 9)\n(main (skip))"
    script = [
        {"tu": 1, "tell": [{"var": "x", "op": "=", "value": 5}]},
        {"tu": 2, "tell": [{"var": "x", "op": "in", "value": [3, 4]}]},
    ]
    resp = client.post("/run", json={"source": source, "units": 3, "script": script})
    records = ndjson(resp)[1:]
    assert [r["vars"].get("x") for r in records] == [None, 5, None]
    assert records[2]["vars"] == {"x": None}  # narrowed but unassigned


def test_run_reports_inconsistency_in_stream(client):
    source = """\
(declare-var x int 0 9)
(main (next (par (tell (= x 1)) (tell (= x 2)))))
"""
    resp = client.post("/run", json={"source": source, "units": 3})
    assert resp.status_code == 200  # failure happens mid-stream
    lines = ndjson(resp)
    assert lines[-1] == {"error": "inconsistent", "tu": 1}
    assert [r["tu"] for r in lines[1:-1]] == [0]


def test_run_parse_error_is_a_400(client):
    resp = client.post("/run", json={"source": "(main (when))", "units": 1})
    assert resp.status_code == 400
    assert resp.json()["detail"]["kind"] == "parse"


def test_run_validates_units(client):
    resp = client.post("/run", json={"source": COUNTER, "units": 0})
    assert resp.status_code == 422


def test_lint_reports_findings(client):
    source = "(declare-var A int 0 9)\n(main (! (! (+ (tell (= A 1)) (tell (= A 2))))))"
    resp = client.post("/lint", json={"source": source})
    assert resp.status_code == 200
    findings = resp.json()["findings"]
    assert len(findings) == 1
    assert findings[0]["rule"] == "inconsistent-replicated-choice"
    assert (findings[0]["line"], findings[0]["col"]) == (2, 10)


def test_lint_clean(client):
    resp = client.post("/lint", json={"source": COUNTER})
    assert resp.json() == {"findings": []}


def test_fo_endpoint(client):
    resp = client.post("/fo", json={"symbols": [60, 62]})
    assert resp.status_code == 200
    data = resp.json()
    assert data["m"] == 2
    assert data["suffix"] == [-1, 0, 0]
    assert [tuple(row) for row in data["delta"]] == [(0, 60, 1), (0, 62, 2), (1, 62, 2)]
    assert data["table"].splitlines()[0] == "states 0..2  (learned 2 symbols)"
    assert data["dot"].startswith("digraph factor_oracle {")


def test_graph_path_endpoint(client):
    resp = client.post(
        "/graph-path",
        json={"edges": [[1, 2], [2, 3], [3, 5]], "source": 1, "target": 5},
    )
    assert resp.json() == {"found": True, "path": [1, 2, 3, 5]}

    resp = client.post("/graph-path", json={"edges": [[1, 2]], "source": 2, "target": 1})
    assert resp.json() == {"found": False, "path": None}


def test_graph_path_validates(client):
    resp = client.post("/graph-path", json={"edges": [[1, 2]], "source": -1, "target": 1})
    assert resp.status_code == 422  # schema catches the negative endpoint


def test_knets_endpoint(client):
    resp = client.post("/knets", json={"pitches": [3, 10, 11], "k": 1})
    data = resp.json()
    assert data["count"] == 3
    assert len(data["solutions"]) == 3
    assert len(data["rendered"]) == 3
    sol = data["solutions"][0]
    assert len(sol["matrix"]) == 3 and len(sol["labels"]) == 3

    capped = client.post("/knets", json={"pitches": [3, 10, 11], "k": 1, "limit": 1}).json()
    assert capped["count"] == 1


def test_bench_endpoint(client):
    resp = client.post("/bench/ccfomi", json={"processes_per_unit": 100, "units": 4})
    data = resp.json()
    assert data["units"] == 4
    assert data["mean_scheduled"] > 0
    assert data["total_s"] > 0


def test_malformed_payloads_are_422(client):
    assert client.post("/run", json={"units": 2}).status_code == 422
    assert client.post("/fo", json={}).status_code == 422
    assert client.post("/knets", json={"pitches": [3], "k": 0}).status_code == 422
