"""Timed engine: runs a process over discrete time units.

Each unit gets a fresh store. The unit loop: create the space, re-materialize
referenced variables, apply input-hook tells, cell tells and persistent tells,
execute this unit's process queue (unit 0 starts with main), settle the store
to its propagation fixpoint, evaluate unless guards against that final store,
apply cell updates and newly registered persistent tells for the next unit,
snapshot for the output hook, and discard the space.

Scheduling uses three engine-level structures: the per-unit process queues,
the persistent-tell list, and the per-unit unless list. Randomness (Star
destinations, Sum branch order) comes from one seeded RNG, so a run is a
deterministic function of (main, input script, seed, horizon).
"""

from __future__ import annotations

import random
import re
import time as _time
from dataclasses import dataclass, field
from typing import Callable

from . import store
from .errors import (
    ArityError,
    BoundsError,
    DimensionError,
    DoubleAssign,
    InconsistentUnit,
    UndeclaredVariable,
    UnguardedRecursion,
    UnknownCell,
    UnknownProcedure,
)
from .domains import INT_MAX, INT_MIN
from .kernel import DictEnv, ExecContext, _make_var, resolve_constraint, resolve_guard
from .store import Space, SpaceStatus
from .syntax import (
    Bang,
    Call,
    CellAssign,
    CellExch,
    CellNew,
    Eq,
    Local,
    Member,
    NextN,
    Par,
    PersistentTell,
    Process,
    Rel,
    Star,
    Sum,
    Tell,
    Unless,
    VarId,
    VarRef,
    When,
)

_NAME_IDX = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\[(-?\d+)\])?$")


def parse_var_name(text: str) -> VarRef:
    m = _NAME_IDX.match(text)
    if not m:
        raise UndeclaredVariable(f"malformed variable name {text!r}")
    name, idx = m.group(1), m.group(2)
    return VarRef(name, int(idx) if idx is not None else None)


@dataclass(frozen=True)
class Decl:
    kind: str  # int | bool | set
    lo: int
    hi: int
    dim: int | None = None  # None for scalars


class VariableRegistry:
    """Logical variable declarations; cells and arrays included.

    Variables are re-materialized lazily in each unit's space: a slot is
    created the first time something references it that unit, so untouched
    array cells cost nothing and snapshots list only what the unit touched.
    """

    def __init__(self):
        self.decls: dict[str, Decl] = {}

    def declare(self, name: str, kind: str, lo: int = INT_MIN, hi: int = INT_MAX, dim=None):
        if kind not in ("int", "bool", "set"):
            raise ArityError(f"unknown variable kind {kind!r}")
        if lo > hi:
            raise BoundsError(f"{name}: empty range [{lo}, {hi}]")
        if dim is not None and dim < 1:
            raise BoundsError(f"{name}: array size must be positive, got {dim}")
        self.decls[name] = Decl(kind, lo, hi, dim)
        return self

    def int_var(self, name, lo=INT_MIN, hi=INT_MAX):
        return self.declare(name, "int", lo, hi)

    def bool_var(self, name):
        return self.declare(name, "bool", 0, 1)

    def set_var(self, name, lo, hi):
        return self.declare(name, "set", lo, hi)

    def int_array(self, name, dim, lo=INT_MIN, hi=INT_MAX):
        return self.declare(name, "int", lo, hi, dim=dim)

    def bool_array(self, name, dim):
        return self.declare(name, "bool", 0, 1, dim=dim)

    def set_array(self, name, dim, lo, hi):
        return self.declare(name, "set", lo, hi, dim=dim)


class Frame:
    """Per-unit lazy binding of registry names to space variables."""

    __slots__ = ("registry", "space", "table", "parent", "decls")

    def __init__(self, registry: VariableRegistry, space: Space):
        self.registry = registry
        self.space = space
        self.table: dict[tuple[str, int | None], VarId] = {}
        self.parent = None
        self.decls = None

    def lookup(self, ref: VarRef) -> VarId:
        key = (ref.name, ref.idx)
        hit = self.table.get(key)
        if hit is not None:
            return hit
        d = self.registry.decls.get(ref.name)
        if d is None:
            raise UndeclaredVariable(f"no declaration for {ref!r}")
        if ref.idx is None and d.dim is not None:
            raise DimensionError(f"{ref.name} is an array of dimension {d.dim}; index required")
        if ref.idx is not None:
            if d.dim is None:
                raise DimensionError(f"{ref.name} is a scalar; indexed access {ref!r}")
            if not 0 <= ref.idx < d.dim:
                raise DimensionError(f"index {ref.idx} outside [0, {d.dim}) for {ref.name}")
        if d.kind == "int":
            vid = self.space.new_int_var(d.lo, d.hi)
        elif d.kind == "bool":
            vid = self.space.new_bool_var()
        else:
            vid = self.space.new_set_var((), range(d.lo, d.hi + 1))
        self.table[key] = vid
        return vid


@dataclass(frozen=True)
class ProcedureDef:
    """A named process template: builder(*int_args) -> Process.

    call_edges, when provided (the DSL elaborator fills it in), lists
    (callee, guarded) pairs for static recursion checks; guarded means the
    call site sits under a next or inside an unless body.
    """

    name: str
    params: tuple[str, ...]
    builder: Callable[..., Process]
    call_edges: tuple[tuple[str, bool], ...] | None = None


def encoded_cell_proc(name: str, flag: str) -> ProcedureDef:
    """Cells spelled as plain processes, for differential testing.

    The built-in cells are engine state; this keeps the same value alive
    with a self-rescheduling keeper: each unit it tells name=z and, unless
    the change flag was raised, re-arms itself with the same z. An update
    raises the flag and schedules a keeper carrying the new value instead.
    """
    keep = f"keep_{name}"

    def build(z: int) -> Process:
        return Par((
            Tell(Rel(VarRef(name), "=", z)),
            Unless(Eq(VarRef(flag), 1), Call(keep, (z,))),
        ))

    return ProcedureDef(keep, ("z",), build)


def encoded_assign(name: str, flag: str, lo: int, hi: int, fn) -> Process:
    """Update ladder for an encoded cell: dispatch on the current value."""
    whens = []
    for v in range(lo, hi + 1):
        whens.append(When(Eq(VarRef(name), v), Par((
            Tell(Rel(VarRef(flag), "=", 1)),
            NextN(1, Call(f"keep_{name}", (fn(v),))),
        ))))
    return Par(tuple(whens))


def encoded_exch(x: str, xflag: str, y: str, yflag: str, lo: int, hi: int, fn) -> Process:
    """Exchange ladder: x moves to fn(old x), y receives old x."""
    whens = []
    for v in range(lo, hi + 1):
        whens.append(When(Eq(VarRef(x), v), Par((
            Tell(Rel(VarRef(xflag), "=", 1)),
            Tell(Rel(VarRef(yflag), "=", 1)),
            NextN(1, Par((Call(f"keep_{x}", (fn(v),)), Call(f"keep_{y}", (v,))))),
        ))))
    return Par(tuple(whens))


@dataclass
class UnitRecord:
    tu: int
    vars: dict[str, object]
    fired_asks: int
    blocked_asks: int
    scheduled: int
    future_scheduled: int
    dropped: int
    elapsed_us: int
    overrun_ms: float | None = None


@dataclass
class Trace:
    seed: int
    units: int
    records: list[UnitRecord] = field(default_factory=list)
    cells: dict[str, int] = field(default_factory=dict)


def record_to_json(rec: UnitRecord, timing: bool = False) -> dict:
    out = {
        "tu": rec.tu,
        "vars": rec.vars,
        "fired_asks": rec.fired_asks,
        "scheduled": rec.scheduled,
    }
    if timing:
        out["elapsed_us"] = rec.elapsed_us
    return out


def script_tells(record: dict) -> list:
    """Convert one input-script tell entry into constraints."""
    out = []
    for item in record.get("tell", ()):
        ref = parse_var_name(item["var"])
        op = item["op"]
        value = item["value"]
        if op == "=":
            out.append(Rel(ref, "=", int(value)))
        elif op == ">=":
            out.append(Rel(ref, ">=", int(value)))
        elif op == "in":
            lo, hi = value
            out.append(Rel(ref, ">=", int(lo)))
            out.append(Rel(ref, "<=", int(hi)))
        else:
            raise ArityError(f"unknown input script op {op!r}")
    return out


class ScriptHook:
    """Input hook backed by parsed input-script records."""

    def __init__(self, records):
        self.by_unit: dict[int, list] = {}
        for rec in records:
            self.by_unit.setdefault(int(rec["tu"]), []).extend(script_tells(rec))

    def __call__(self, tu: int):
        return self.by_unit.get(tu, ())


class TimedEngine:
    def __init__(
        self,
        registry: VariableRegistry | None = None,
        procedures: dict[str, ProcedureDef] | None = None,
        *,
        seed: int = 0,
        input_hook=None,
        output_hook=None,
        general_recursion: bool = False,
        unit_budget: int = 200_000,
        fixed_unit_ms: int | None = None,
    ):
        self.registry = registry or VariableRegistry()
        self.procs = dict(procedures or {})
        self.seed = seed
        self.input_hook = input_hook
        self.output_hook = output_hook
        self.general_recursion = general_recursion
        self.unit_budget = unit_budget
        self.fixed_unit_ms = fixed_unit_ms
        self.reset(seed, horizon=1)

    def reset(self, seed: int, horizon: int):
        self.rng = random.Random(seed)
        self.seed = seed
        self.horizon = horizon
        self.time = 0
        self.queues: dict[int, list[Process]] = {}
        self.persistent: list[tuple[object, tuple]] = []
        self.cells: dict[str, int] = {}
        self.total_enqueued = 0
        self.total_executed_from_queue = 0
        self.total_dropped = 0
        # per-unit scratch
        self._space: Space | None = None
        self._frame: Frame | None = None
        self._ctx: ExecContext | None = None
        self._unless: list = []
        self._pending_cells: dict[str, tuple] = {}
        self._persistent_new: list = []
        self._future_scheduled = 0
        self._dropped = 0
        self._active_calls: dict[str, int] = {}

    # ----------------------------------------------------------- scheduling

    def _local_chain(self, env) -> Process | None:
        """Collect enclosing Local decls so deferred bodies rebuild them."""
        chain = []
        e = env
        while e is not None:
            d = getattr(e, "decls", None)
            if d:
                chain.append(d)
            e = getattr(e, "parent", None)
        return chain

    def _wrap_locals(self, proc: Process, env) -> Process:
        for decls in self._local_chain(env):
            proc = Local(decls, proc)
        return proc

    def _schedule(self, unit: int, proc: Process, env=None) -> bool:
        """Queue proc for a future unit; False when beyond the horizon."""
        if unit >= self.horizon:
            self._dropped += 1
            self.total_dropped += 1
            return False
        if env is not None:
            proc = self._wrap_locals(proc, env)
        self.queues.setdefault(unit, []).append(proc)
        self._future_scheduled += 1
        self.total_enqueued += 1
        return True

    # ------------------------------------------------------- timed dispatch

    def step_time_process(self, p: Process, space: Space, env):
        t = self.time
        kind = type(p)
        if kind is NextN:
            self._schedule(t + p.n, p.body, env)
        elif kind is Unless:
            g = resolve_guard(p.g, env)
            self._unless.append((g, self._wrap_locals(p.body, env)))
        elif kind is Bang:
            self._ctx.push(p.body, env)
            self._schedule(t + 1, Bang(self._wrap_locals(p.body, env)))
        elif kind is Star:
            unit = self.rng.randint(t, self.horizon - 1)
            if unit == t:
                self._ctx.push(p.body, env)
            else:
                self._schedule(unit, p.body, env)
        elif kind is Sum:
            self._post_sum(p, space, env)
        elif kind is Call:
            self._call(p, env)
        elif kind is CellNew:
            name = p.name
            if name not in self.registry.decls:
                self.registry.declare(name, "int", INT_MIN, INT_MAX)
            self.cells[name] = p.init
            store.post_rel(
                space, env.lookup(VarRef(name)), "=", p.init, label=f"{name} = {p.init} (cell)"
            )
        elif kind is CellAssign:
            if p.name not in self.cells:
                raise UnknownCell(f"assign to unknown cell {p.name!r}")
            if p.name in self._pending_cells:
                raise DoubleAssign(f"cell {p.name!r} updated twice in unit {t}")
            self._pending_cells[p.name] = ("assign", p.fn)
        elif kind is CellExch:
            if p.x not in self.cells:
                raise UnknownCell(f"exchange on unknown cell {p.x!r}")
            if p.y not in self.cells:
                raise UnknownCell(f"exchange on unknown cell {p.y!r}")
            if p.x in self._pending_cells or p.y in self._pending_cells:
                raise DoubleAssign(f"cell {p.x!r}/{p.y!r} updated twice in unit {t}")
            self._pending_cells[p.x] = ("exch_src", p.fn)
            self._pending_cells[p.y] = ("exch_dst", p.x)
        elif kind is PersistentTell:
            self._persistent_new.append((p.c, tuple(self._local_chain(env))))
        else:
            raise TypeError(f"not a timed process: {p!r}")

    def _post_sum(self, p: Sum, space: Space, env):
        n = len(p.branches)
        order = list(range(n))
        if n > 1:
            self.rng.shuffle(order)
        guards, thunks = [], []
        ctx = self._ctx
        for i in order:
            g, body = p.branches[i]
            guards.append(resolve_guard(g, env))
            thunks.append(lambda sp, _b=body, _e=env: ctx.execute(_b, sp, _e))
        store.post_choice(space, guards, thunks, label=f"sum over {n} branches")

    def _call(self, p: Call, env):
        proc = self.procs.get(p.name)
        if proc is None:
            raise UnknownProcedure(f"no procedure named {p.name!r}")
        if len(p.args) != len(proc.params):
            raise ArityError(
                f"{p.name} takes {len(proc.params)} arguments, got {len(p.args)}"
            )
        if self._active_calls.get(p.name, 0) > 0 and not self.general_recursion:
            raise UnguardedRecursion(
                f"{p.name} re-entered within one time unit; recursive calls must "
                f"be guarded by next (or enable general recursion)"
            )
        body = proc.builder(*p.args)
        self._active_calls[p.name] = self._active_calls.get(p.name, 0) + 1
        self._ctx.push_exit(p.name)
        # procedure bodies are closed over the registry, not the caller scope
        self._ctx.push(body, self._frame)

    def _exit_call(self, name: str):
        self._active_calls[name] -= 1

    # --------------------------------------------------------- the unit loop

    def run_time_unit(self, main: Process | None = None) -> UnitRecord:
        t = self.time
        started = _time.perf_counter()
        space = store.new_space()
        frame = Frame(self.registry, space)
        self._space, self._frame = space, frame
        self._unless = []
        self._pending_cells = {}
        self._persistent_new = []
        self._future_scheduled = 0
        self._dropped = 0
        self._active_calls = {}
        ctx = ExecContext(
            on_timed=self.step_time_process,
            budget=self.unit_budget if self.general_recursion else None,
            on_exit=self._exit_call,
        )
        self._ctx = ctx

        try:
            if self.input_hook is not None:
                for c in self.input_hook(t):
                    store.post_tell(space, resolve_constraint(c, frame), label=repr(c))
            for name, value in self.cells.items():
                store.post_rel(
                    space, frame.lookup(VarRef(name)), "=", value, label=f"{name} = {value} (cell)"
                )
            for c, chain in self.persistent:
                env = frame
                for decls in reversed(chain):
                    inner = DictEnv({}, env)
                    inner.decls = decls
                    env = inner
                    for d in decls:
                        inner.table[(d.name, None)] = _make_var(space, d.kind, d.lo, d.hi)
                store.post_tell(space, resolve_constraint(c, env), label=f"{c!r} (persistent)")

            if t == 0 and main is not None:
                ctx.execute(main, space, frame)
            queued = self.queues.pop(t, [])
            self.total_executed_from_queue += len(queued)
            for proc in queued:
                ctx.execute(proc, space, frame)

            status = space.propagate_to_fixpoint()
            if status is SpaceStatus.FAILED:
                raise InconsistentUnit(t, list(space.tell_log))

            for g, body in self._unless:
                if store.eval_guard(space, g) is not True:
                    self._schedule(t + 1, body)

            for name, op in self._pending_cells.items():
                if op[0] == "assign":
                    self.cells[name] = op[1](self.cells[name])
            # exchanges read the pre-update source value
            sources = {
                name: self.cells[name]
                for name, op in self._pending_cells.items()
                if op[0] == "exch_src"
            }
            for name, op in self._pending_cells.items():
                if op[0] == "exch_src":
                    self.cells[name] = op[1](sources[name])
                elif op[0] == "exch_dst":
                    self.cells[name] = sources[op[1]]

            self.persistent.extend(self._persistent_new)

            vars_out = {}
            for (name, idx), vid in sorted(
                frame.table.items(), key=lambda kv: (kv[0][0], kv[0][1] if kv[0][1] is not None else -1)
            ):
                view = store.read_var(space, vid)
                display = name if idx is None else f"{name}[{idx}]"
                if view.kind == "set":
                    vars_out[display] = {"glb": sorted(view.glb), "lub": sorted(view.lub)}
                else:
                    vars_out[display] = view.value
            elapsed_us = int((_time.perf_counter() - started) * 1_000_000)
            record = UnitRecord(
                tu=t,
                vars=vars_out,
                fired_asks=space.asks_fired,
                blocked_asks=len(space.blocked_asks()),
                scheduled=ctx.processes,
                future_scheduled=self._future_scheduled,
                dropped=self._dropped,
                elapsed_us=elapsed_us,
            )
            if self.fixed_unit_ms is not None:
                deadline = started + self.fixed_unit_ms / 1000.0
                now = _time.perf_counter()
                if now < deadline:
                    _time.sleep(deadline - now)
                else:
                    record.overrun_ms = (now - deadline) * 1000.0
            if self.output_hook is not None:
                self.output_hook(record)
            return record
        finally:
            self._space = self._frame = self._ctx = None
            self.time = t + 1

    def run(self, main: Process | None, n_units: int, seed: int | None = None):
        """Generator of UnitRecords; raises InconsistentUnit where it fails."""
        self.reset(self.seed if seed is None else seed, horizon=n_units)
        for i in range(n_units):
            yield self.run_time_unit(main if i == 0 else None)

    def simulate(self, main: Process | None, n_units: int, seed: int | None = None) -> Trace:
        trace = Trace(seed=self.seed if seed is None else seed, units=n_units)
        for rec in self.run(main, n_units, seed):
            trace.records.append(rec)
        trace.cells = dict(self.cells)
        return trace


def run_time_unit(engine: TimedEngine, main: Process | None = None) -> UnitRecord:
    return engine.run_time_unit(main)


def step_time_process(engine: TimedEngine, proc: Process, space: Space, env):
    return engine.step_time_process(proc, space, env)


def simulate(engine: TimedEngine, main: Process | None, n_units: int, seed: int = 0) -> Trace:
    return engine.simulate(main, n_units, seed)


def nondet_choice(engine: TimedEngine, space: Space, branches, env):
    return engine._post_sum(Sum(tuple(branches)), space, env)


# ------------------------------------------------------------------ validate


@dataclass(frozen=True)
class Finding:
    rule: str
    message: str


def _tree_nodes(p: Process):
    stack = [p]
    while stack:
        q = stack.pop()
        yield q
        kind = type(q)
        if kind is Par:
            stack.extend(q.children)
        elif kind in (When, Unless, NextN, Bang, Star, Local):
            stack.append(q.body)
        elif kind is Sum:
            stack.extend(b for _, b in q.branches)


def _direct_tells(p: Process):
    """Tells reachable without crossing a time or guard boundary."""
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, Tell):
            yield q
        elif isinstance(q, (Par,)):
            stack.extend(q.children)
        elif isinstance(q, (Bang, Local)):
            stack.append(q.body)


def check_bang_sum(p: Process) -> list[Finding]:
    out = []
    for node in _tree_nodes(p):
        if not isinstance(node, Bang) or isinstance(node.body, Bang):
            continue
        body = node.body
        if not isinstance(body, Sum):
            continue
        told: dict[object, set] = {}
        for _, branch in body.branches:
            for tell in _direct_tells(branch):
                c = tell.c
                if isinstance(c, Rel) and c.op == "=" and isinstance(c.rhs, int):
                    told.setdefault(c.lhs, set()).add(c.rhs)
        for ref, values in told.items():
            if len(values) > 1:
                out.append(
                    Finding(
                        "replicated-choice-conflict",
                        f"replicated choice tells {ref!r} different values "
                        f"{sorted(values)}; replicas can contradict each other",
                    )
                )
    return out


def check_persistent_tells(p: Process) -> list[Finding]:
    out = []
    for node in _tree_nodes(p):
        if not isinstance(node, PersistentTell):
            continue
        c = node.c
        if isinstance(c, Member):
            out.append(
                Finding(
                    "persistent-structured-tell",
                    f"persistent set-membership tell {c!r}: the set bound would "
                    f"need copying between units",
                )
            )
        elif isinstance(c, Rel) and c.op != "=" and not isinstance(c.rhs, int) and not isinstance(c.lhs, int):
            out.append(
                Finding(
                    "persistent-structured-tell",
                    f"persistent inter-variable inequality {c!r} cannot be "
                    f"carried across units",
                )
            )
    return out


def check_dimensions(p: Process, registry: VariableRegistry) -> list[Finding]:
    out = []
    seen = set()

    def check_ref(x):
        if not isinstance(x, VarRef) or x in seen:
            return
        seen.add(x)
        d = registry.decls.get(x.name)
        if d is None:
            out.append(Finding("undeclared", f"no declaration for {x!r}"))
        elif x.idx is not None and d.dim is None:
            out.append(Finding("dimension", f"{x.name} is scalar but indexed as {x!r}"))
        elif x.idx is None and d.dim is not None:
            out.append(Finding("dimension", f"{x.name} is an array; index required"))
        elif x.idx is not None and not 0 <= x.idx < d.dim:
            out.append(Finding("dimension", f"index {x.idx} outside [0, {d.dim}) for {x.name}"))

    def check_guard(g):
        for attr in ("lhs", "rhs", "sv"):
            check_ref(getattr(g, attr, None))
        for sub in getattr(g, "gs", ()):
            check_guard(sub)
        if hasattr(g, "g"):
            check_guard(g.g)

    local_names = set()
    for node in _tree_nodes(p):
        if isinstance(node, Local):
            local_names.update(d.name for d in node.decls)
    for node in _tree_nodes(p):
        if isinstance(node, (Tell, PersistentTell)):
            for attr in ("lhs", "rhs", "sv"):
                x = getattr(node.c, attr, None)
                if isinstance(x, VarRef) and x.name not in local_names:
                    check_ref(x)
        elif isinstance(node, (When, Unless)):
            check_guard(node.g)
        elif isinstance(node, Sum):
            for g, _ in node.branches:
                check_guard(g)
    return out


def check_recursion(procedures: dict[str, ProcedureDef]) -> list[Finding]:
    """Reject cycles made only of unguarded call edges."""
    edges: dict[str, set[str]] = {}
    for name, proc in procedures.items():
        if proc.call_edges is None:
            continue
        for callee, guarded in proc.call_edges:
            if not guarded:
                edges.setdefault(name, set()).add(callee)
    out = []
    # depth-first cycle detection on the unguarded subgraph
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in procedures}
    def visit(n, path):
        color[n] = GREY
        for m in sorted(edges.get(n, ())):
            if m not in color:
                continue
            if color[m] == GREY:
                cyc = path[path.index(m):] + [m] if m in path else [n, m]
                out.append(
                    Finding(
                        "unguarded-recursion",
                        "call cycle without a next guard: " + " -> ".join(cyc),
                    )
                )
            elif color[m] == WHITE:
                visit(m, path + [m])
        color[n] = BLACK
    for n in sorted(color):
        if color[n] == WHITE:
            visit(n, [n])
    return out


def validate(
    proc: Process,
    procedures: dict[str, ProcedureDef] | None = None,
    registry: VariableRegistry | None = None,
) -> list[Finding]:
    """Static findings for a process tree (advisory, mirrors the DSL lint)."""
    out = []
    out.extend(check_bang_sum(proc))
    out.extend(check_persistent_tells(proc))
    if registry is not None:
        out.extend(check_dimensions(proc, registry))
    if procedures:
        out.extend(check_recursion(procedures))
    return out
