"""Request/response bodies for the HTTP service."""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, Field


class TellItem(BaseModel):
    var: str
    op: Literal["=", ">=", "in"]
    value: Union[int, tuple[int, int]]


class ScriptRecord(BaseModel):
    tu: int = Field(ge=0)
    tell: list[TellItem] = []


class RunRequest(BaseModel):
    source: str
    units: int = Field(gt=0)
    seed: int = 0
    args: list[int] = []
    script: list[ScriptRecord] = []
    fixed_unit_ms: int | None = Field(default=None, ge=0)
    timing: bool = False


class LintRequest(BaseModel):
    source: str


class Finding(BaseModel):
    rule: str
    message: str
    line: int
    col: int


class LintResponse(BaseModel):
    findings: list[Finding]


class FoRequest(BaseModel):
    symbols: list[int]


class FoResponse(BaseModel):
    m: int
    delta: list[tuple[int, int, int]]   # (from, symbol, to)
    suffix: list[int]
    table: str
    dot: str


class GraphRequest(BaseModel):
    edges: list[tuple[int, int]]
    source: int = Field(ge=0)
    target: int = Field(ge=0)


class GraphResponse(BaseModel):
    found: bool
    path: list[int] | None


class KnetsRequest(BaseModel):
    pitches: list[int] = Field(min_length=2)
    k: int = Field(ge=0)
    limit: int | None = Field(default=None, gt=0)
    connected: bool = False


class KnetsSolution(BaseModel):
    matrix: list[list[int]]
    labels: list[list[str]]


class KnetsResponse(BaseModel):
    count: int
    solutions: list[KnetsSolution]
    rendered: list[str]


class BenchRequest(BaseModel):
    processes_per_unit: int = Field(default=880, gt=0)
    units: int | None = Field(default=None, gt=0)
    seed: int = 0


class BenchResponse(BaseModel):
    processes_target: int
    notes: int
    units: int
    mean_scheduled: float
    max_scheduled: int
    mean_elapsed_ms: float
    max_elapsed_ms: float
    total_s: float
