"""Command line interface, exercised in-process through the click runner."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from tellask.cli import main

GOLDEN = Path(__file__).resolve().parent / "golden"

COUNTER = """\
(declare-var x int 0 99)
(defproc count (v) (par (tell (= x v)) (next (call count (+ v 1)))))
(main (call count 1))
"""

INCONSISTENT = """\
(declare-var x int 0 9)
(main (next (par (tell (= x 1)) (tell (= x 2)))))
"""


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def counter_file(tmp_path):
    path = tmp_path / "counter.ntcc"
    path.write_text(COUNTER)
    return str(path)


def test_run_prints_one_record_per_unit(runner, counter_file):
    result = runner.invoke(main, ["run", counter_file, "--units", "3", "--seed", "7"])
    assert result.exit_code == 0
    assert result.stdout.splitlines() == [
        '{"tu": 0, "vars": {"x": 1}, "fired_asks": 0, "scheduled": 4}',
        '{"tu": 1, "vars": {"x": 2}, "fired_asks": 0, "scheduled": 4}',
        '{"tu": 2, "vars": {"x": 3}, "fired_asks": 0, "scheduled": 4}',
    ]
    # the seed echo lives on stderr so stdout stays pure trace
    assert json.loads(result.stderr) == {"seed": 7, "units": 3}


def test_run_is_reproducible(runner, counter_file):
    args = ["run", counter_file, "--units", "4", "--seed", "13"]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.stdout == second.stdout
    assert first.exit_code == second.exit_code == 0


def test_run_timing_flag(runner, counter_file):
    result = runner.invoke(main, ["run", counter_file, "--units", "1", "--timing"])
    rec = json.loads(result.stdout.splitlines()[0])
    assert "elapsed_us" in rec


def test_run_fixed_unit_overrun_warns_on_stderr(runner, counter_file):
    # zero budget: every unit overruns, so each one gets a warning line
    result = runner.invoke(
        main, ["run", counter_file, "--units", "2", "--fixed-unit-ms", "0"]
    )
    assert result.exit_code == 0
    assert len(result.stdout.splitlines()) == 2  # trace stays pure
    warns = [
        json.loads(line)
        for line in result.stderr.splitlines()
        if line.startswith('{"warning"')
    ]
    assert [w["tu"] for w in warns] == [0, 1]
    assert all(w["warning"] == "overrun" for w in warns)


def test_run_with_input_script(runner, tmp_path):
    spec = tmp_path / "blank.ntcc"
    spec.write_text("(declare-var x int 0 9)\n(main (skip))\n")
    script = tmp_path / "input.jsonl"
    script.write_text('{"tu": 1, "tell": [{"var": "x", "op": "=", "value": 5}]}\n')
    result = runner.invoke(main, ["run", str(spec), "--units", "2", "--input", str(script)])
    assert result.exit_code == 0
    values = [json.loads(line)["vars"].get("x") for line in result.stdout.splitlines()]
    assert values == [None, 5]


def test_run_with_main_args(runner, tmp_path):
    spec = tmp_path / "args.ntcc"
    spec.write_text("(declare-var x int 0 99)\n(main (tell (= x (+ arg0 arg1))))\n")
    result = runner.invoke(main, ["run", str(spec), "--units", "1", "--args", "2,3"])
    assert json.loads(result.stdout.splitlines()[0])["vars"]["x"] == 5


def test_run_reports_inconsistency(runner, tmp_path):
    spec = tmp_path / "bad.ntcc"
    spec.write_text(INCONSISTENT)
    result = runner.invoke(main, ["run", str(spec), "--units", "3"])
    assert result.exit_code == 1
    lines = result.stdout.splitlines()
    assert json.loads(lines[0])["tu"] == 0
    assert json.loads(lines[-1]) == {"error": "inconsistent", "tu": 1}
    assert "error: inconsistent (tu 1)" in result.stderr


@pytest.mark.parametrize(
    "args",
    [
        ["run", "{spec}", "--units", "0"],          # below the range floor
        ["run", "/no/such/file.ntcc", "--units", "1"],
        ["run", "{spec}", "--units", "1", "--args", "2,x"],
    ],
)
def test_run_usage_errors_exit_2(runner, counter_file, args):
    args = [a.format(spec=counter_file) for a in args]
    result = runner.invoke(main, args)
    assert result.exit_code == 2


def test_run_parse_error_exits_2(runner, tmp_path):
    spec = tmp_path / "broken.ntcc"
    spec.write_text("(main (when))\n")
    result = runner.invoke(main, ["run", str(spec), "--units", "1"])
    assert result.exit_code == 2
    assert result.stderr.startswith("error:")


def test_run_rejects_bad_script_json(runner, counter_file, tmp_path):
    script = tmp_path / "bad.jsonl"
    script.write_text("{not json}\n")
    result = runner.invoke(
        main, ["run", counter_file, "--units", "1", "--input", str(script)]
    )
    assert result.exit_code == 2
    assert "not valid JSON" in result.stderr


def test_fo_table_matches_golden(runner):
    result = runner.invoke(main, ["fo", "--input", "60,62,62"])
    assert result.exit_code == 0
    assert result.stdout == (GOLDEN / "fo_table.txt").read_text()


def test_fo_writes_dot(runner, tmp_path):
    dot = tmp_path / "oracle.dot"
    result = runner.invoke(main, ["fo", "--input", "60,62", "--dot", str(dot)])
    assert result.exit_code == 0
    assert dot.read_text().startswith("digraph factor_oracle {")
    assert f"wrote {dot}" in result.stderr


def test_fo_rejects_non_integers(runner):
    result = runner.invoke(main, ["fo", "--input", "60,sixty"])
    assert result.exit_code == 2


def test_graph_path_output(runner, tmp_path):
    edges = tmp_path / "edges.txt"
    edges.write_text("1 2\n2 3\n3 5\n")
    result = runner.invoke(main, ["graph-path", "--edges", str(edges), "--from", "1", "--to", "5"])
    assert result.exit_code == 0
    assert result.stdout == "1 -> 2 -> 3 -> 5\n"

    result = runner.invoke(main, ["graph-path", "--edges", str(edges), "--from", "5", "--to", "1"])
    assert result.exit_code == 0
    assert result.stdout == "no path from 5 to 1\n"


def test_graph_path_rejects_malformed_edges(runner, tmp_path):
    edges = tmp_path / "edges.txt"
    edges.write_text("1 2 3\n")
    result = runner.invoke(main, ["graph-path", "--edges", str(edges), "--from", "1", "--to", "2"])
    assert result.exit_code == 2


def test_knets_rendering_matches_golden(runner):
    result = runner.invoke(main, ["knets", "--pitches", "3,10,11", "--k", "1"])
    assert result.exit_code == 0
    assert result.stdout == (GOLDEN / "knets_once.txt").read_text()


def test_knets_json_and_limit(runner):
    result = runner.invoke(main, ["knets", "--pitches", "3,10,11", "--k", "1", "--json", "--limit", "2"])
    data = json.loads(result.stdout)
    assert data["pitches"] == [3, 10, 11]
    assert data["k"] == 1
    assert data["count"] == 2
    assert len(data["solutions"]) == 2


def test_lint_clean_and_findings(runner, counter_file, tmp_path):
    result = runner.invoke(main, ["lint", counter_file])
    assert result.exit_code == 0
    assert result.stdout == f"{counter_file}: clean\n"

    spec = tmp_path / "shout.ntcc"
    spec.write_text("(declare-var A int 0 9)\n(main (! (! (+ (tell (= A 1)) (tell (= A 2))))))\n")
    result = runner.invoke(main, ["lint", str(spec)])
    assert result.exit_code == 0  # findings are advisory
    assert result.stdout.startswith(f"{spec}:2:10: inconsistent-replicated-choice:")


def test_bench_ccfomi_summary(runner):
    result = runner.invoke(main, ["bench", "ccfomi", "--processes-per-unit", "60", "--units", "4"])
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("notes ")
    assert lines[1].startswith("scheduled/unit: mean ")
    assert lines[2].startswith("elapsed/unit:   mean ")
    assert lines[3].startswith("total:          ")


def test_unreachable_server_exits_1(runner):
    result = runner.invoke(main, ["--server", "http://127.0.0.1:9", "fo", "--input", "60"])
    assert result.exit_code == 1
    assert result.stderr.startswith("error:")
