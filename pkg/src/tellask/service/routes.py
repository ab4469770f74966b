"""HTTP endpoints: one route per CLI verb, core package does the work."""

from __future__ import annotations

import json

from fastapi import APIRouter, HTTPException
from fastapi.responses import StreamingResponse

from .. import dsl
from ..engine import ScriptHook, TimedEngine, record_to_json
from ..errors import ConfigError, InconsistentUnit, TellaskError
from ..factor_oracle import FactorOracle
from ..models import ccfomi, graph_paths, knets
from . import schemas

router = APIRouter()


def _bad_request(kind: str, exc: Exception):
    return HTTPException(status_code=400, detail={"kind": kind, "message": str(exc)})


@router.post("/run")
def run_spec(req: schemas.RunRequest):
    try:
        spec = dsl.load(req.source, tuple(req.args))
    except TellaskError as exc:
        raise _bad_request("parse", exc)
    hook = ScriptHook([rec.model_dump() for rec in req.script]) if req.script else None
    engine = TimedEngine(
        spec.registry,
        spec.procedures,
        seed=req.seed,
        input_hook=hook,
        fixed_unit_ms=req.fixed_unit_ms,
    )

    def lines():
        yield json.dumps({"seed": req.seed, "units": req.units}) + "\n"
        try:
            for rec in engine.run(spec.main, req.units, req.seed):
                yield json.dumps(record_to_json(rec, timing=req.timing)) + "\n"
                if rec.overrun_ms is not None:
                    warn = {"warning": "overrun", "tu": rec.tu, "overrun_ms": round(rec.overrun_ms, 3)}
                    yield json.dumps(warn) + "\n"
        except InconsistentUnit as exc:
            yield json.dumps({"error": "inconsistent", "tu": exc.unit}) + "\n"
        except TellaskError as exc:
            yield json.dumps({"error": "runtime", "message": str(exc)}) + "\n"

    return StreamingResponse(lines(), media_type="application/x-ndjson")


@router.post("/lint", response_model=schemas.LintResponse)
def lint_spec(req: schemas.LintRequest):
    try:
        findings = dsl.lint(dsl.parse(req.source))
    except TellaskError as exc:
        raise _bad_request("parse", exc)
    return schemas.LintResponse(
        findings=[schemas.Finding(rule=f.rule, message=f.message, line=f.line, col=f.col) for f in findings]
    )


def _fo_table(fo: FactorOracle) -> str:
    lines = [f"states 0..{fo.m}  (learned {fo.m} symbols)", "state  suffix  factor links"]
    for state in range(fo.m + 1):
        suf = fo.suffix(state)
        links = ", ".join(
            f"{sym} -> {to}" for sym, to in sorted(fo.transitions(state).items(), key=lambda kv: str(kv[0]))
        )
        lines.append(f"{state:>5}  {'-' if suf < 0 else suf:>6}  {links}".rstrip())
    return "\n".join(lines) + "\n"


@router.post("/fo", response_model=schemas.FoResponse)
def build_fo(req: schemas.FoRequest):
    fo = FactorOracle(req.symbols)
    payload = json.loads(fo.to_json())
    return schemas.FoResponse(
        m=payload["m"],
        delta=[tuple(row) for row in payload["delta"]],
        suffix=payload["suffix"],
        table=_fo_table(fo),
        dot=fo.to_dot(),
    )


@router.post("/graph-path", response_model=schemas.GraphResponse)
def find_path(req: schemas.GraphRequest):
    try:
        spec = graph_paths.GraphSpec.make(req.edges, req.source, req.target)
    except ConfigError as exc:
        raise _bad_request("config", exc)
    result = graph_paths.graph_path_run(spec)
    return schemas.GraphResponse(found=result.found, path=list(result.path) if result.path else None)


@router.post("/knets", response_model=schemas.KnetsResponse)
def solve_knets(req: schemas.KnetsRequest):
    try:
        problem = knets.KnetProblem.make(req.pitches, req.k)
    except ConfigError as exc:
        raise _bad_request("config", exc)
    matrices = knets.knets_solve(problem, limit=req.limit)
    if req.connected:
        matrices = [m for m in matrices if knets.is_connected(m)]
    solutions = [
        schemas.KnetsSolution(matrix=[list(row) for row in m], labels=[list(row) for row in knets.decode(problem, m)])
        for m in matrices
    ]
    rendered = [knets.render(problem, m) for m in matrices]
    return schemas.KnetsResponse(count=len(matrices), solutions=solutions, rendered=rendered)


@router.post("/bench/ccfomi", response_model=schemas.BenchResponse)
def bench_ccfomi(req: schemas.BenchRequest):
    report = ccfomi.bench(req.processes_per_unit, units=req.units, seed=req.seed)
    return schemas.BenchResponse(
        processes_target=report.processes_target,
        notes=report.notes,
        units=report.units,
        mean_scheduled=report.mean_scheduled,
        max_scheduled=report.max_scheduled,
        mean_elapsed_ms=report.mean_elapsed_ms,
        max_elapsed_ms=report.max_elapsed_ms,
        total_s=report.total_s,
    )


@router.get("/health")
def health():
    from .. import __version__

    return {"status": "ok", "name": "tellask", "version": __version__}
