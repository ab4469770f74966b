"""The constraint store: spaces, variables, tells, reification, fixpoint.

A Space owns the domains of its variables and a table of propagators with a
FIFO queue keyed by variable-modification events. Tells post single-shot
propagators; guards are reified to 0/1 truth variables; asks are propagators
that run a continuation when their truth variable becomes 1. Failure is
sticky: once a domain wipes out, the space stays failed and further posts are
ignored. Cloning copies domains and liveness while sharing the immutable
propagator objects, which is what makes copy-based search cheap enough.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from .domains import INT_MAX, INT_MIN, IntDomain, SetDomain
from .errors import KindError
from .propagators import (
    AskProp,
    BoolAnd,
    BoolNot,
    BoolOr,
    DistinctProp,
    LinearProp,
    MemberProp,
    ParCond,
    ReifiedLeaf,
    RelVC,
    RelVV,
    SetDomEqProp,
    SetMinusProp,
    Status,
    leaf_status,
    var_key,
)
from .syntax import (
    And,
    Count,
    Distinct,
    Eq,
    FLIP,
    Gq,
    Gt,
    GTrue,
    Linear,
    Member,
    Not,
    Or,
    Rel,
    SetDomEq,
    SetIn,
    SetMinus,
    VarId,
)


class SpaceStatus(enum.Enum):
    FIXPOINT = "fixpoint"
    FAILED = "failed"


@dataclass
class VarView:
    """Result of read_var: value for int/bool kinds, bounds for sets."""

    kind: str
    assigned: bool
    value: int | None = None
    glb: frozenset[int] | None = None
    lub: frozenset[int] | None = None


class Space:
    def __init__(self):
        self.int_doms: list[IntDomain] = []
        self.set_doms: list[SetDomain] = []
        self.props: list = []
        self.alive: list[bool] = []
        self.subs: dict[tuple[str, int], list[int]] = {}
        self.queue: deque[int] = deque()
        self.queued: set[int] = set()
        self.failed = False
        self.running: int | None = None
        self.branching = None
        self.tell_log: list[str] = []
        self.asks_fired = 0

    # ------------------------------------------------------------- variables

    def new_int_var(self, lo: int = INT_MIN, hi: int = INT_MAX) -> VarId:
        self.int_doms.append(IntDomain.range(lo, hi))
        return VarId("int", len(self.int_doms) - 1)

    def new_bool_var(self) -> VarId:
        self.int_doms.append(IntDomain.range(0, 1))
        return VarId("bool", len(self.int_doms) - 1)

    def new_set_var(self, glb=(), lub=()) -> VarId:
        self.set_doms.append(SetDomain.make(glb, lub))
        return VarId("set", len(self.set_doms) - 1)

    def int_dom(self, v: VarId) -> IntDomain:
        if v.kind == "set":
            raise KindError(f"{v!r} is a set variable, int accessor used")
        return self.int_doms[v.index]

    def set_dom(self, v: VarId) -> SetDomain:
        if v.kind != "set":
            raise KindError(f"{v!r} is an {v.kind} variable, set accessor used")
        return self.set_doms[v.index]

    # -------------------------------------------------------- domain updates

    def fail(self):
        self.failed = True
        self.queue.clear()
        self.queued.clear()

    def _changed(self, key):
        for pid in self.subs.get(key, ()):
            if self.alive[pid] and pid != self.running and pid not in self.queued:
                self.queued.add(pid)
                self.queue.append(pid)

    def narrow_int(self, idx: int, nd: IntDomain) -> bool:
        if self.failed:
            return False
        od = self.int_doms[idx]
        if nd is od or nd.ivs == od.ivs:
            return False
        if nd.empty:
            self.fail()
            return False
        self.int_doms[idx] = nd
        self._changed(("i", idx))
        return True

    def _narrow_set(self, idx: int, nd: SetDomain | None) -> bool:
        if self.failed:
            return False
        if nd is None:
            self.fail()
            return False
        od = self.set_doms[idx]
        if nd is od or (nd.glb == od.glb and nd.lub == od.lub):
            return False
        self.set_doms[idx] = nd
        self._changed(("s", idx))
        return True

    def set_include(self, idx: int, v: int) -> bool:
        return self._narrow_set(idx, self.set_doms[idx].include(v))

    def set_exclude(self, idx: int, v: int) -> bool:
        return self._narrow_set(idx, self.set_doms[idx].exclude(v))

    def set_restrict(self, idx: int, glb_add, lub_keep) -> bool:
        return self._narrow_set(
            idx, self.set_doms[idx].restrict(frozenset(glb_add), frozenset(lub_keep))
        )

    # ----------------------------------------------------------- propagators

    def register(self, prop, enqueue: bool = True) -> int:
        pid = len(self.props)
        self.props.append(prop)
        self.alive.append(True)
        for key in prop.var_keys():
            self.subs.setdefault(key, []).append(pid)
        if enqueue and not self.failed:
            self.queued.add(pid)
            self.queue.append(pid)
        return pid

    def propagate_to_fixpoint(self) -> SpaceStatus:
        if self.failed:
            return SpaceStatus.FAILED
        while self.queue:
            pid = self.queue.popleft()
            self.queued.discard(pid)
            if not self.alive[pid]:
                continue
            self.running = pid
            try:
                st = self.props[pid].propagate(self)
            finally:
                self.running = None
            if self.failed or st is Status.FAILED:
                self.fail()
                return SpaceStatus.FAILED
            if st is Status.SUBSUMED:
                self.alive[pid] = False
            elif st is Status.NOFIX:
                if pid not in self.queued:
                    self.queued.add(pid)
                    self.queue.append(pid)
        return SpaceStatus.FIXPOINT

    def blocked_asks(self) -> list[str]:
        """Labels of ask/choice propagators still alive (undecided guards)."""
        out = []
        for pid, prop in enumerate(self.props):
            if self.alive[pid] and isinstance(prop, (AskProp, ParCond)):
                out.append(prop.label or f"ask#{pid}")
        return out

    def clone(self) -> "Space":
        assert self.running is None, "clone during propagation is not allowed"
        s = Space.__new__(Space)
        s.int_doms = list(self.int_doms)
        s.set_doms = list(self.set_doms)
        s.props = list(self.props)
        s.alive = list(self.alive)
        s.subs = {k: list(v) for k, v in self.subs.items()}
        s.queue = deque(self.queue)
        s.queued = set(self.queued)
        s.failed = self.failed
        s.running = None
        s.branching = self.branching
        s.tell_log = list(self.tell_log)
        s.asks_fired = self.asks_fired
        return s


# ------------------------------------------------------------- module-level API


def new_space() -> Space:
    return Space()


def new_int_var(space: Space, lo: int = INT_MIN, hi: int = INT_MAX) -> VarId:
    return space.new_int_var(lo, hi)


def new_bool_var(space: Space) -> VarId:
    return space.new_bool_var()


def new_set_var(space: Space, glb=(), lub=()) -> VarId:
    return space.new_set_var(glb, lub)


def clone(space: Space) -> Space:
    return space.clone()


def propagate_to_fixpoint(space: Space) -> SpaceStatus:
    return space.propagate_to_fixpoint()


def read_var(space: Space, v: VarId) -> VarView:
    if v.kind == "set":
        d = space.set_doms[v.index]
        return VarView("set", d.assigned, glb=d.glb, lub=d.lub)
    d = space.int_doms[v.index]
    return VarView(v.kind, d.assigned, value=d.value if d.assigned else None)


def int_value(space: Space, v: VarId) -> int | None:
    d = space.int_dom(v)
    return d.value if d.assigned else None


def set_bounds(space: Space, v: VarId) -> tuple[frozenset[int], frozenset[int]]:
    d = space.set_dom(v)
    return d.glb, d.lub


def _compare(a: int, op: str, b: int) -> bool:
    return {
        "=": a == b,
        "!=": a != b,
        "<": a < b,
        "<=": a <= b,
        ">": a > b,
        ">=": a >= b,
    }[op]


def _check_int_operand(x):
    if isinstance(x, VarId) and x.kind == "set":
        raise KindError(f"{x!r} is a set variable used in an integer relation")


def post_rel(space: Space, lhs, op: str, rhs, label: str | None = None):
    """Tell lhs op rhs; operands are VarIds or ints."""
    _check_int_operand(lhs)
    _check_int_operand(rhs)
    if label is not None:
        space.tell_log.append(label)
    if space.failed:
        return
    if isinstance(lhs, int) and isinstance(rhs, int):
        if not _compare(lhs, op, rhs):
            space.fail()
        return
    if isinstance(lhs, int):
        lhs, rhs, op = rhs, lhs, FLIP[op]
    if isinstance(rhs, int):
        space.register(RelVC(lhs, op, rhs))
        return
    if op == ">=":
        lhs, rhs, op = rhs, lhs, "<="
    elif op == ">":
        lhs, rhs, op = rhs, lhs, "<"
    space.register(RelVV(lhs, op, rhs))


def post_member(space: Space, elt: int, sv: VarId, negated: bool = False, label: str | None = None):
    if not (isinstance(sv, VarId) and sv.kind == "set"):
        raise KindError(f"{sv!r} is not a set variable")
    if label is not None:
        space.tell_log.append(label)
    if space.failed:
        return
    space.register(MemberProp(elt, sv, negated))


def post_set_dom(space: Space, sv: VarId, lo: int, hi: int, label: str | None = None):
    if not (isinstance(sv, VarId) and sv.kind == "set"):
        raise KindError(f"{sv!r} is not a set variable")
    if label is not None:
        space.tell_log.append(label)
    if space.failed:
        return
    space.register(SetDomEqProp(sv, lo, hi))


def post_tell(space: Space, c, label: str | None = None):
    """Dispatch a constraint (Rel, Member or SetDomEq) with resolved operands."""
    if isinstance(c, Rel):
        post_rel(space, c.lhs, c.op, c.rhs, label=label or repr(c))
    elif isinstance(c, Member):
        post_member(space, c.elt, c.sv, c.negated, label=label or repr(c))
    elif isinstance(c, SetDomEq):
        post_set_dom(space, c.sv, c.lo, c.hi, label=label or repr(c))
    else:
        raise TypeError(f"not a tellable constraint: {c!r}")


def post_linear(space: Space, coeffs, xs, op: str, rhs: int):
    from .errors import ArityError

    xs = tuple(xs)
    if not xs:
        raise ArityError("linear constraint over no variables")
    for x in xs:
        _check_int_operand(x)
    coeffs = tuple(coeffs)
    if len(coeffs) != len(xs):
        raise ArityError("coefficient and variable counts differ")
    if space.failed:
        return
    if op == "<":
        op, rhs = "<=", rhs - 1
    elif op == ">":
        op, rhs = ">=", rhs + 1
    if op == ">=":
        coeffs = tuple(-a for a in coeffs)
        op, rhs = "<=", -rhs
    space.register(LinearProp(coeffs, xs, op, rhs))


def post_distinct(space: Space, xs, offsets=None):
    from .errors import ArityError

    xs = tuple(xs)
    if not xs:
        raise ArityError("distinct over no variables")
    for x in xs:
        _check_int_operand(x)
    if space.failed:
        return
    space.register(DistinctProp(xs, offsets))


def post_count(space: Space, xs, value: int, op: str, rhs: int):
    """count is decomposed: one reified equality per variable plus a linear sum."""
    bs = [reify_guard(space, Eq(x, value)) for x in xs]
    post_linear(space, [1] * len(bs), bs, op, rhs)


def post_set_minus(space: Space, a: VarId, b: VarId, c: VarId):
    for v in (a, b, c):
        if v.kind != "set":
            raise KindError(f"{v!r} is not a set variable")
    if space.failed:
        return
    space.register(SetMinusProp(a, b, c))


def post_global(space: Space, spec):
    if isinstance(spec, Linear):
        post_linear(space, spec.coeffs, spec.xs, spec.op, spec.rhs)
    elif isinstance(spec, Distinct):
        post_distinct(space, spec.xs, spec.offsets)
    elif isinstance(spec, Count):
        post_count(space, spec.xs, spec.value, spec.op, spec.rhs)
    elif isinstance(spec, SetMinus):
        post_set_minus(space, spec.a, spec.b, spec.c)
    else:
        raise TypeError(f"not a global constraint spec: {spec!r}")


# ------------------------------------------------------------------ guards


def reify_guard(space: Space, g) -> VarId:
    """Reflect guard g into a fresh 0/1 truth variable.

    Truth is domain entailment: the guard's relation must hold under every
    valuation of the current domains. Interval reasoning does not discover
    consequences like transitivity; see the tests for the exact strength.
    """
    if isinstance(g, GTrue):
        b = space.new_bool_var()
        space.narrow_int(b.index, space.int_doms[b.index].clamp(1, 1))
        return b
    if isinstance(g, (Eq, Gq, Gt)):
        _check_int_operand(getattr(g, "lhs", None))
        _check_int_operand(getattr(g, "rhs", None))
        b = space.new_bool_var()
        space.register(ReifiedLeaf(g, b))
        return b
    if isinstance(g, SetIn):
        if not (isinstance(g.sv, VarId) and g.sv.kind == "set"):
            raise KindError(f"{g.sv!r} is not a set variable")
        b = space.new_bool_var()
        space.register(ReifiedLeaf(g, b))
        return b
    if isinstance(g, And):
        bs = tuple(reify_guard(space, x) for x in g.gs)
        b = space.new_bool_var()
        space.register(BoolAnd(bs, b))
        return b
    if isinstance(g, Or):
        bs = tuple(reify_guard(space, x) for x in g.gs)
        b = space.new_bool_var()
        space.register(BoolOr(bs, b))
        return b
    if isinstance(g, Not):
        bg = reify_guard(space, g.g)
        b = space.new_bool_var()
        space.register(BoolNot(bg, b))
        return b
    raise TypeError(f"not a guard: {g!r}")


def eval_guard(space: Space, g) -> bool | None:
    """Three-valued guard evaluation against current domains (no side effects)."""
    if isinstance(g, GTrue):
        return True
    if isinstance(g, (Eq, Gq, Gt, SetIn)):
        return leaf_status(space, g)
    if isinstance(g, And):
        r = True
        for x in g.gs:
            s = eval_guard(space, x)
            if s is False:
                return False
            if s is None:
                r = None
        return r
    if isinstance(g, Or):
        r = False
        for x in g.gs:
            s = eval_guard(space, x)
            if s is True:
                return True
            if s is None:
                r = None
        return r
    if isinstance(g, Not):
        s = eval_guard(space, g.g)
        return None if s is None else not s
    raise TypeError(f"not a guard: {g!r}")


def post_ask(space: Space, guard, thunk, label: str = ""):
    """Install when-guard-do-thunk; the thunk runs inside propagation."""
    b = reify_guard(space, guard)
    space.register(AskProp(b, thunk, label))


def post_choice(space: Space, guards, thunks, label: str = ""):
    """Install a guarded choice over pre-ordered branches (see ParCond)."""
    bs = [reify_guard(space, g) for g in guards]
    space.register(ParCond(bs, thunks, label))
