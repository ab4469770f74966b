"""Concurrent factor-oracle music improvisation model.

The model learns a pitch sequence into factor-oracle automaton variables and
then improvises over it, all inside the timed engine:

- Player feeds scheduled pitches and maintains go, the count of notes played.
- Sync i waits until the suffix link of note i-1 is known and note i has been
  played, then learns note i and arms Sync i+1 for the next unit.
- Add i reads the played pitch and starts a suffix-chain walk at state i-1.
- Walk i p k asks whether state k already has a p link. If entailed, the
  suffix link of i is that link's target. Otherwise, at the next unit it
  extends state k with the link into i and steps back along k's suffix link.
- Choice / Chain improvise once go reaches the threshold: each unit a seeded
  coin picks between emitting the next original symbol (forward link) and
  silently jumping back along a suffix link for new context.

Learned facts persist across time units as replicated tells, so every unit's
fresh store re-derives the full automaton. Procedure parameters are the only
loop state; reading a variable's value into a parameter is done with a choice
ladder of equality guards, one branch per candidate value, where impossible
branches fold away at instantiation because the guards become constant.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field
from random import Random

from .. import dsl
from ..engine import ScriptHook, TimedEngine, Trace
from ..errors import ConfigError
from ..factor_oracle import FactorOracle
from ..syntax import Rel, VarRef

PITCH_SPAN = 128  # flat index stride for the (state, pitch) link table


@dataclass(frozen=True)
class CcfomiConfig:
    script: tuple = ()            # pitch scheduled at units 0,1,2,...
    n: int | None = None          # notes before improvisation starts
    q: float = 1.0                # continuity probability (forward vs jump)
    horizon: int | None = None
    seed: int = 0
    dim: int | None = None        # max learnable notes
    alphabet: tuple | None = None
    player: str = "scripted"      # scripted: postpone only on empty units

    def resolved(self) -> "CcfomiConfig":
        script = tuple(int(p) for p in self.script)
        n = len(script) if self.n is None else self.n
        dim = max(len(script), n, 1) if self.dim is None else self.dim
        alphabet = self.alphabet
        if alphabet is None:
            alphabet = tuple(sorted(set(script)))
        alphabet = tuple(int(a) for a in alphabet)
        horizon = 4 * dim + 6 if self.horizon is None else self.horizon
        cfg = CcfomiConfig(script, n, self.q, horizon, self.seed, dim, alphabet, self.player)
        cfg.validate()
        return cfg

    def validate(self):
        if not 0.0 <= self.q <= 1.0:
            raise ConfigError(f"q must be in [0, 1], got {self.q}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.dim < 1 or self.dim < len(self.script):
            raise ConfigError(f"dim {self.dim} cannot hold a {len(self.script)}-note script")
        if self.player not in ("scripted", "free"):
            raise ConfigError(f"unknown player mode {self.player!r}")
        if self.player == "free" and not self.alphabet:
            raise ConfigError("free player needs an explicit alphabet")
        for p in (*self.script, *self.alphabet):
            if not 0 <= p < PITCH_SPAN:
                raise ConfigError(f"pitch {p} outside [0, {PITCH_SPAN})")


def _link(k: str, p: str) -> str:
    return f"delta[(+ (* {k} {PITCH_SPAN}) {p})]"


def build_text(config: CcfomiConfig) -> str:
    """The model as spec-language source."""
    cfg = config.resolved()
    cap = cfg.dim
    alpha = cfg.alphabet or (0,)
    postpone = "(v> 0 pin)" if cfg.player == "scripted" else "true"

    play_ladder = " ".join(
        f"((= pin {w}) (! (tell (= pitch[j] {w}))))" for w in alpha
    )
    add_ladder = " ".join(
        f"((= pitch[i] {w}) (call Walk i {w} (- i 1)))" for w in alpha
    )
    back_ladder = " ".join(
        f"((and (= S[k] {v}) (v> k {v})) (call Walk i p {v}))" for v in range(cap)
    )
    jump_ladder = " ".join(
        f"((and (= S[k] {v}) (v> k {v})) (next (call Chain {v})))" for v in range(cap)
    )
    fwd = f"(and (= qcoin 1) (v> {cap + 1} (+ k 1)) (v>= pitch[(+ k 1)] 0))"
    bwd = "(and (= qcoin 0) (v>= S[k] 0))"

    return f"""\
; factor-oracle improvisation over a {cap}-note capacity
(declare-var go int 0 {cap + 1})
(declare-var pin int -1 {PITCH_SPAN - 1})
(declare-var qcoin int 0 1)
(declare-var out int -1 {PITCH_SPAN - 1})
(declare-var cur int 0 {cap})
(declare-var improv int 0 1)
(declare-array S int {cap + 1} -2 {cap})
(declare-array pitch int {cap + 1} -1 {PITCH_SPAN - 1})
(declare-array F set {cap + 1} 0 {PITCH_SPAN - 1})
(declare-array delta int {(cap + 1) * PITCH_SPAN} 0 {cap})

; walk the suffix chain for note i carrying pitch p, standing at state k
(defproc Walk (i p k) (par
  ; state k already continues on p: the suffix link of i is that target
  (when (in p F[k]) (! (tell (= S[i] {_link('k', 'p')}))))
  ; unknown by unit end: extend k with a link into i, then step to k's suffix
  (unless (in p F[k]) (par
    (! (tell (= {_link('k', 'p')} i)))
    (! (tell (in p F[k])))
    (call StepBack i p k)))))

; dispatch on the value of S[k]: -1 means the chain is exhausted
(defproc StepBack (i p k) (sum
  ((= S[k] -1) (! (tell (= S[i] 0))))
  {back_ladder}))

; dispatch on the pitch of note i and start its walk at state i-1
(defproc Add (i) (sum {add_ladder}))

; learn note i once its predecessor's suffix link is known and it was played
(defproc Sync (i) (when (v> {cap + 1} i) (par
  (when (and (v>= S[(- i 1)] -1) (v>= go i))
    (par (call Add i) (next (call Sync (+ i 1)))))
  (unless (and (v>= S[(- i 1)] -1) (v>= go i)) (call Sync i)))))

; play the scheduled pitch (if any) or postpone; go counts notes played
(defproc Player (j) (sum
  ((and (v>= pin 0) (v> {cap + 1} j)) (par
    (sum {play_ladder})
    (tell (= go j))
    (next (call Player (+ j 1)))))
  ({postpone} (par (tell (= go (- j 1))) (next (call Player j))))))

; one-shot latch so repeated triggers start a single improvisation chain
(defproc Choice (k) (when (= improv 0) (par
  (assign improv (lambda (v) 1))
  (call Chain k))))

; improvise from state k: emit the next original symbol or jump back
(defproc Chain (k) (par
  (sum
    ({fwd} (par (tell (= out pitch[(+ k 1)])) (tell (= cur k))
                (next (call Chain (+ k 1)))))
    ({bwd} (par (tell (= cur k)) (call JumpBack k))))
  (unless (or {fwd} {bwd}) (call Chain k))))

(defproc JumpBack (k) (sum {jump_ladder}))

(main (par
  (cell improv 0)
  (! (tell (= S[0] -1)))
  (call Player 1)
  (call Sync 1)
  (! (when (= go {cfg.n}) (call Choice {cfg.n})))))
"""


def ccfomi_build(config: CcfomiConfig) -> dsl.ElaboratedSpec:
    return dsl.load(build_text(config))


class CcfomiHook:
    """Per-unit input: scheduled pitch (or -1) and the seeded q coin."""

    def __init__(self, cfg: CcfomiConfig):
        self.cfg = cfg
        self.rng = Random(cfg.seed * 2654435761 % (2**31) + 17)

    def __call__(self, tu: int):
        cfg = self.cfg
        if tu < len(cfg.script):
            pin = cfg.script[tu]
        elif cfg.player == "free":
            pin = self.rng.choice(cfg.alphabet)
        else:
            pin = -1
        coin = 1 if self.rng.random() < cfg.q else 0
        return (Rel(VarRef("pin"), "=", pin), Rel(VarRef("qcoin"), "=", coin))


@dataclass
class ModelAutomaton:
    m: int
    S: list
    delta: dict          # (state, pitch) -> state
    F: dict              # state -> frozenset of pitches

    def matches(self, fo: FactorOracle) -> bool:
        return self.m == fo.m and self.S == fo.S and self.delta == fo.delta


@dataclass
class CcfomiResult:
    config: CcfomiConfig
    trace: Trace
    automaton: ModelAutomaton
    emitted: list        # (unit, state, pitch) forward emissions
    jumps: list          # (unit, state) backward jumps
    mean_elapsed_us: float
    mean_scheduled: float
    max_scheduled: int


def decode_automaton(record_vars: dict) -> ModelAutomaton:
    S, delta, F = {}, {}, {}
    for name, value in record_vars.items():
        if value is None:
            continue
        if name.startswith("S[") :
            S[int(name[2:-1])] = value
        elif name.startswith("delta["):
            k, p = divmod(int(name[6:-1]), PITCH_SPAN)
            delta[(k, p)] = value
        elif name.startswith("F["):
            F[int(name[2:-1])] = frozenset(value["glb"])
    m = 0
    while m + 1 in S:
        m += 1
    return ModelAutomaton(m, [S.get(i, 0) for i in range(m + 1)], delta, F)


def ccfomi_run(config: CcfomiConfig) -> CcfomiResult:
    cfg = config.resolved()
    spec = ccfomi_build(cfg)
    engine = TimedEngine(spec.registry, spec.procedures, seed=cfg.seed,
                         input_hook=CcfomiHook(cfg))
    trace = engine.simulate(spec.main, cfg.horizon)
    emitted, jumps = [], []
    for rec in trace.records:
        out = rec.vars.get("out")
        cur = rec.vars.get("cur")
        if out is not None and out >= 0:
            emitted.append((rec.tu, cur, out))
        elif cur is not None:
            jumps.append((rec.tu, cur))
    last = trace.records[-1].vars if trace.records else {}
    n_units = max(len(trace.records), 1)
    return CcfomiResult(
        config=cfg,
        trace=trace,
        automaton=decode_automaton(last),
        emitted=emitted,
        jumps=jumps,
        mean_elapsed_us=sum(r.elapsed_us for r in trace.records) / n_units,
        mean_scheduled=sum(r.scheduled for r in trace.records) / n_units,
        max_scheduled=max((r.scheduled for r in trace.records), default=0),
    )


def reference_oracle(script) -> FactorOracle:
    return FactorOracle(script)


# ----------------------------------------------------------------- benchmark

@dataclass
class BenchReport:
    processes_target: int
    notes: int
    units: int
    mean_scheduled: float
    max_scheduled: int
    mean_elapsed_ms: float
    max_elapsed_ms: float
    total_s: float


def bench(processes_per_unit: int = 880, units: int | None = None, seed: int = 0) -> BenchReport:
    """Size a run whose steady state schedules about the requested count."""
    # measured: a run over 2L units averages about 6.8 scheduled processes
    # per learned note (replicated link/suffix tells dominate)
    notes = max(2, round(processes_per_unit / 6.8))
    rng = Random(seed)
    script = tuple(rng.choice((60, 62, 64, 65, 67)) for _ in range(notes))
    horizon = units if units is not None else 2 * notes
    cfg = CcfomiConfig(script=script, n=notes, q=0.5, horizon=horizon, seed=seed).resolved()
    started = _time.perf_counter()
    result = ccfomi_run(cfg)
    total = _time.perf_counter() - started
    recs = result.trace.records
    return BenchReport(
        processes_target=processes_per_unit,
        notes=notes,
        units=len(recs),
        mean_scheduled=result.mean_scheduled,
        max_scheduled=result.max_scheduled,
        mean_elapsed_ms=sum(r.elapsed_us for r in recs) / len(recs) / 1000.0,
        max_elapsed_ms=max(r.elapsed_us for r in recs) / 1000.0,
        total_s=total,
    )
