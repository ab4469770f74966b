"""Untimed process execution: tells, asks, parallel composition, locals.

Executing a process only posts constraints and propagators into the space;
the fixpoint is computed separately. Ask continuations run inside propagation
(they post, they never re-enter the fixpoint loop), so arbitrarily long ask
cascades unwind iteratively in the propagator queue.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import store
from .errors import ArityError, UndeclaredVariable
from .store import Space, SpaceStatus, VarView
from .syntax import (
    And,
    Eq,
    Gq,
    Gt,
    GTrue,
    Local,
    LocalDecl,
    Member,
    Not,
    Or,
    Par,
    Rel,
    SetDomEq,
    SetIn,
    Skip,
    Tell,
    TIMED_FORMS,
    VarId,
    VarRef,
    When,
)


@dataclass(frozen=True)
class ArrayDecl:
    name: str
    kind: str
    dim: int
    lo: int
    hi: int


class DictEnv:
    """Chained name environment mapping (name, index) to store variables."""

    __slots__ = ("table", "parent", "decls")

    def __init__(self, table=None, parent=None):
        self.table = table or {}
        self.parent = parent
        self.decls = None

    def lookup(self, ref: VarRef) -> VarId:
        key = (ref.name, ref.idx)
        env = self
        while isinstance(env, DictEnv):
            hit = env.table.get(key)
            if hit is not None:
                return hit
            env = env.parent
        if env is not None:
            # a registry frame or other root resolves (and may create) the slot
            return env.lookup(ref)
        raise UndeclaredVariable(f"no declaration for {ref!r}")


def build_env(space: Space, decls) -> DictEnv:
    table = {}
    for d in decls:
        if isinstance(d, ArrayDecl):
            for i in range(d.dim):
                table[(d.name, i)] = _make_var(space, d.kind, d.lo, d.hi)
        else:
            table[(d.name, None)] = _make_var(space, d.kind, d.lo, d.hi)
    return DictEnv(table)


def _make_var(space: Space, kind: str, lo: int, hi: int) -> VarId:
    if kind == "int":
        return space.new_int_var(lo, hi)
    if kind == "bool":
        return space.new_bool_var()
    if kind == "set":
        return space.new_set_var((), range(lo, hi + 1))
    raise ArityError(f"unknown variable kind {kind!r}")


def resolve_operand(x, env):
    if isinstance(x, VarRef):
        return env.lookup(x)
    return x


def resolve_constraint(c, env):
    if isinstance(c, Rel):
        return Rel(resolve_operand(c.lhs, env), c.op, resolve_operand(c.rhs, env))
    if isinstance(c, Member):
        return Member(c.elt, resolve_operand(c.sv, env), c.negated)
    if isinstance(c, SetDomEq):
        return SetDomEq(resolve_operand(c.sv, env), c.lo, c.hi)
    raise TypeError(f"not a constraint: {c!r}")


def resolve_guard(g, env):
    if isinstance(g, GTrue):
        return g
    if isinstance(g, Eq):
        return Eq(resolve_operand(g.lhs, env), resolve_operand(g.rhs, env))
    if isinstance(g, Gq):
        return Gq(resolve_operand(g.lhs, env), resolve_operand(g.rhs, env))
    if isinstance(g, Gt):
        return Gt(resolve_operand(g.lhs, env), resolve_operand(g.rhs, env))
    if isinstance(g, SetIn):
        return SetIn(g.elt, resolve_operand(g.sv, env))
    if isinstance(g, And):
        return And(tuple(resolve_guard(x, env) for x in g.gs))
    if isinstance(g, Or):
        return Or(tuple(resolve_guard(x, env) for x in g.gs))
    if isinstance(g, Not):
        return Not(resolve_guard(g.g, env))
    raise TypeError(f"not a guard: {g!r}")


class ExecContext:
    """Walks process trees iteratively, posting into a space.

    on_timed, when given, receives every non-CCP form (the timed engine
    installs its scheduler there); without it, timed forms are rejected.
    The scheduler may push further work onto the active worklist (procedure
    calls) and mark scope exits, so recursion never grows the Python stack.
    """

    def __init__(self, on_timed=None, budget=None, on_exit=None):
        self.on_timed = on_timed
        self.budget = budget
        self.on_exit = on_exit
        self.processes = 0
        self._stack: list | None = None

    def push(self, proc, env):
        self._stack.append((proc, env))

    def push_exit(self, name: str):
        self._stack.append((name,))

    def execute(self, proc, space: Space, env):
        prev = self._stack
        stack = self._stack = [(proc, env)]
        try:
            while stack:
                item = stack.pop()
                if len(item) == 1:
                    self.on_exit(item[0])
                    continue
                p, env = item
                self.processes += 1
                if self.budget is not None and self.processes > self.budget:
                    from .errors import BudgetExceeded

                    raise BudgetExceeded(
                        f"more than {self.budget} processes executed in one time unit"
                    )
                t = type(p)
                if t is Skip:
                    continue
                if t is Tell:
                    store.post_tell(space, resolve_constraint(p.c, env), label=repr(p.c))
                elif t is Par:
                    for child in reversed(p.children):
                        stack.append((child, env))
                elif t is Local:
                    table = {}
                    for d in p.decls:
                        table[(d.name, None)] = _make_var(space, d.kind, d.lo, d.hi)
                    inner = DictEnv(table, env)
                    inner.decls = p.decls
                    stack.append((p.body, inner))
                elif t is When:
                    g = resolve_guard(p.g, env)
                    body, benv, ctx = p.body, env, self
                    store.post_ask(
                        space,
                        g,
                        lambda sp, _b=body, _e=benv: ctx.execute(_b, sp, _e),
                        label=f"when {p.g!r}",
                    )
                elif isinstance(p, TIMED_FORMS):
                    if self.on_timed is None:
                        raise ArityError(f"timed form {type(p).__name__} in an untimed run")
                    self.on_timed(p, space, env)
                else:
                    raise TypeError(f"not a process: {p!r}")
        finally:
            self._stack = prev


def execute(proc, space: Space, env=None) -> ExecContext:
    """Run an untimed process against a space; returns the context (stats)."""
    ctx = ExecContext()
    ctx.execute(proc, space, env or DictEnv())
    return ctx


@dataclass
class CcpSnapshot:
    status: SpaceStatus
    vars: dict[str, VarView]
    blocked: list[str]
    space: Space
    asks_fired: int = 0


def _display(name: str, idx) -> str:
    return name if idx is None else f"{name}[{idx}]"


def run_ccp(proc, decls=()) -> CcpSnapshot:
    """Execute a closed untimed process in a fresh space and settle it.

    decls is the top-level declaration block (LocalDecl / ArrayDecl); any
    other free variable must be introduced by Local inside the process.
    """
    space = store.new_space()
    env = build_env(space, decls)
    execute(proc, space, env)
    status = space.propagate_to_fixpoint()
    out: dict[str, VarView] = {}
    for (name, idx), vid in env.table.items():
        out[_display(name, idx)] = store.read_var(space, vid)
    return CcpSnapshot(
        status=status,
        vars=out,
        blocked=space.blocked_asks() if status is SpaceStatus.FIXPOINT else [],
        space=space,
        asks_fired=space.asks_fired,
    )


def post_ask(space: Space, guard, continuation, env=None, label: str = ""):
    """Module-level ask: continuation is a process tree executed when guard holds."""
    env = env or DictEnv()
    g = resolve_guard(guard, env)
    ctx = ExecContext()
    store.post_ask(
        space,
        g,
        lambda sp, _b=continuation, _e=env: ctx.execute(_b, sp, _e),
        label=label or f"when {guard!r}",
    )
