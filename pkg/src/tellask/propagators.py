"""Propagator implementations.

A propagator is an immutable object holding variable ids and parameters; all
mutable state (domains, liveness, the queue) lives in the Space, so clones can
share propagator objects. propagate() narrows domains through space methods
and reports one of the four classic statuses.
"""

from __future__ import annotations

import enum

from .domains import INT_MAX, INT_MIN
from .syntax import Eq, Gq, Gt, GTrue, SetIn, VarId


class Status(enum.Enum):
    FIX = "fix"
    NOFIX = "nofix"
    SUBSUMED = "subsumed"
    FAILED = "failed"


def var_key(v: VarId) -> tuple[str, int]:
    return ("s", v.index) if v.kind == "set" else ("i", v.index)


def _bounds(space, x) -> tuple[int, int]:
    """(min, max) of an int operand; constants are singleton pseudo-domains."""
    if isinstance(x, int):
        return x, x
    d = space.int_dom(x)
    return d.min, d.max


def leaf_status(space, leaf):
    """Three-valued domain entailment of a guard leaf: True, False or None."""
    if isinstance(leaf, GTrue):
        return True
    if isinstance(leaf, SetIn):
        d = space.set_dom(leaf.sv)
        if leaf.elt in d.glb:
            return True
        if leaf.elt not in d.lub:
            return False
        return None
    if isinstance(leaf, Eq):
        if isinstance(leaf.lhs, int) and isinstance(leaf.rhs, int):
            return leaf.lhs == leaf.rhs
        if isinstance(leaf.lhs, int) or isinstance(leaf.rhs, int):
            v, c = (leaf.rhs, leaf.lhs) if isinstance(leaf.lhs, int) else (leaf.lhs, leaf.rhs)
            d = space.int_dom(v)
            if d.assigned and d.value == c:
                return True
            if c not in d:
                return False
            return None
        dl, dr = space.int_dom(leaf.lhs), space.int_dom(leaf.rhs)
        if dl.assigned and dr.assigned:
            return dl.value == dr.value
        if dl.intersect(dr).empty:
            return False
        return None
    if isinstance(leaf, (Gq, Gt)):
        llo, lhi = _bounds(space, leaf.lhs)
        rlo, rhi = _bounds(space, leaf.rhs)
        if isinstance(leaf, Gq):
            if llo >= rhi:
                return True
            if lhi < rlo:
                return False
        else:
            if llo > rhi:
                return True
            if lhi <= rlo:
                return False
        return None
    raise TypeError(f"not a guard leaf: {leaf!r}")


class Propagator:
    """Base class; subclasses define var_keys() and propagate()."""

    def var_keys(self):
        return ()

    def propagate(self, space) -> Status:
        raise NotImplementedError


class RelVC(Propagator):
    """x op c: applied once, then subsumed."""

    __slots__ = ("x", "op", "c")

    def __init__(self, x: VarId, op: str, c: int):
        self.x, self.op, self.c = x, op, c

    def var_keys(self):
        return (var_key(self.x),)

    def propagate(self, space) -> Status:
        i, c = self.x.index, self.c
        d = space.int_doms[i]
        if self.op == "=":
            space.narrow_int(i, d.clamp(c, c))
        elif self.op == "!=":
            space.narrow_int(i, d.remove(c))
        elif self.op == "<=":
            space.narrow_int(i, d.clamp(INT_MIN, c))
        elif self.op == "<":
            space.narrow_int(i, d.clamp(INT_MIN, c - 1))
        elif self.op == ">=":
            space.narrow_int(i, d.clamp(c, INT_MAX))
        else:  # >
            space.narrow_int(i, d.clamp(c + 1, INT_MAX))
        return Status.SUBSUMED


class RelVV(Propagator):
    """x op y between two int variables; op is one of = != <= <."""

    __slots__ = ("x", "op", "y")

    def __init__(self, x: VarId, op: str, y: VarId):
        self.x, self.op, self.y = x, op, y

    def var_keys(self):
        return (var_key(self.x), var_key(self.y))

    def propagate(self, space) -> Status:
        i, j = self.x.index, self.y.index
        dx, dy = space.int_doms[i], space.int_doms[j]
        if self.op == "=":
            m = dx.intersect(dy)
            space.narrow_int(i, m)
            space.narrow_int(j, m)
            return Status.SUBSUMED if m.assigned else Status.FIX
        if self.op == "!=":
            if dx.assigned:
                space.narrow_int(j, dy.remove(dx.value))
            if dy.assigned:
                space.narrow_int(i, dx.remove(dy.value))
            if space.failed:
                return Status.FIX
            if space.int_doms[i].intersect(space.int_doms[j]).empty:
                return Status.SUBSUMED
            return Status.FIX
        if self.op == "<=":
            space.narrow_int(i, dx.clamp(INT_MIN, dy.max))
            space.narrow_int(j, dy.clamp(dx.min, INT_MAX))
            if not space.failed and space.int_doms[i].max <= space.int_doms[j].min:
                return Status.SUBSUMED
            return Status.FIX
        # <
        space.narrow_int(i, dx.clamp(INT_MIN, dy.max - 1))
        space.narrow_int(j, dy.clamp(dx.min + 1, INT_MAX))
        if not space.failed and space.int_doms[i].max < space.int_doms[j].min:
            return Status.SUBSUMED
        return Status.FIX


class LinearProp(Propagator):
    """sum(coeffs[i] * xs[i]) op rhs with op in {=, <=, !=}; bounds consistent."""

    __slots__ = ("coeffs", "xs", "op", "rhs")

    def __init__(self, coeffs, xs, op, rhs):
        self.coeffs, self.xs, self.op, self.rhs = tuple(coeffs), tuple(xs), op, rhs

    def var_keys(self):
        return tuple(var_key(x) for x in self.xs)

    def _prune_le(self, space, coeffs, rhs) -> bool:
        """Enforce sum <= rhs; returns True when entailed for all futures."""
        mins = []
        for a, x in zip(coeffs, self.xs):
            d = space.int_doms[x.index]
            mins.append(a * d.min if a > 0 else a * d.max)
        low = sum(mins)
        if low > rhs:
            space.fail()
            return False
        for a, x, m in zip(coeffs, self.xs, mins):
            d = space.int_doms[x.index]
            slack = rhs - (low - m)
            if a > 0:
                space.narrow_int(x.index, d.clamp(INT_MIN, slack // a))
            else:
                # a*x <= slack with a < 0  ->  x >= ceil(slack / a) = -(slack // -a)
                space.narrow_int(x.index, d.clamp(-(slack // -a), INT_MAX))
            if space.failed:
                return False
        high = 0
        for a, x in zip(coeffs, self.xs):
            d = space.int_doms[x.index]
            high += a * d.max if a > 0 else a * d.min
        return high <= rhs

    def propagate(self, space) -> Status:
        if self.op == "<=":
            ent = self._prune_le(space, self.coeffs, self.rhs)
            if space.failed:
                return Status.FIX
            return Status.SUBSUMED if ent else Status.FIX
        if self.op == "=":
            e1 = self._prune_le(space, self.coeffs, self.rhs)
            if space.failed:
                return Status.FIX
            neg = tuple(-a for a in self.coeffs)
            e2 = self._prune_le(space, neg, -self.rhs)
            if space.failed:
                return Status.FIX
            return Status.SUBSUMED if e1 and e2 else Status.FIX
        # != : act only when at most one variable is unassigned
        total, free = 0, None
        for a, x in zip(self.coeffs, self.xs):
            d = space.int_doms[x.index]
            if d.assigned:
                total += a * d.value
            elif free is None:
                free = (a, x)
            else:
                return Status.FIX
        if free is None:
            if total == self.rhs:
                return Status.FAILED
            return Status.SUBSUMED
        a, x = free
        rem = self.rhs - total
        if rem % a == 0:
            d = space.int_doms[x.index]
            space.narrow_int(x.index, d.remove(rem // a))
        return Status.SUBSUMED


class DistinctProp(Propagator):
    """all different on xs[i] + offsets[i], value-propagation strength."""

    __slots__ = ("xs", "offsets")

    def __init__(self, xs, offsets=None):
        self.xs = tuple(xs)
        self.offsets = tuple(offsets) if offsets else (0,) * len(self.xs)

    def var_keys(self):
        return tuple(var_key(x) for x in self.xs)

    def propagate(self, space) -> Status:
        taken: dict[int, int] = {}
        for k, (x, off) in enumerate(zip(self.xs, self.offsets)):
            d = space.int_doms[x.index]
            if d.assigned:
                v = d.value + off
                if v in taken:
                    return Status.FAILED
                taken[v] = k
        unassigned = 0
        for k, (x, off) in enumerate(zip(self.xs, self.offsets)):
            d = space.int_doms[x.index]
            if d.assigned:
                continue
            unassigned += 1
            for v, owner in taken.items():
                if owner != k:
                    d = d.remove(v - off)
            space.narrow_int(x.index, d)
            if space.failed:
                return Status.FIX
        return Status.SUBSUMED if unassigned <= 1 else Status.FIX


class MemberProp(Propagator):
    """elt in S (or not in S); applied once."""

    __slots__ = ("elt", "sv", "negated")

    def __init__(self, elt: int, sv: VarId, negated: bool):
        self.elt, self.sv, self.negated = elt, sv, negated

    def var_keys(self):
        return (var_key(self.sv),)

    def propagate(self, space) -> Status:
        if self.negated:
            space.set_exclude(self.sv.index, self.elt)
        else:
            space.set_include(self.sv.index, self.elt)
        return Status.SUBSUMED


class SetDomEqProp(Propagator):
    """S = {lo..hi}; applied once."""

    __slots__ = ("sv", "lo", "hi")

    def __init__(self, sv: VarId, lo: int, hi: int):
        self.sv, self.lo, self.hi = sv, lo, hi

    def propagate(self, space) -> Status:
        want = frozenset(range(self.lo, self.hi + 1))
        space.set_restrict(self.sv.index, want, want)
        return Status.SUBSUMED


class SetMinusProp(Propagator):
    """c = a \\ b over set variables, bounds propagation."""

    __slots__ = ("a", "b", "c")

    def __init__(self, a: VarId, b: VarId, c: VarId):
        self.a, self.b, self.c = a, b, c

    def var_keys(self):
        return (var_key(self.a), var_key(self.b), var_key(self.c))

    def propagate(self, space) -> Status:
        da = space.set_doms[self.a.index]
        db = space.set_doms[self.b.index]
        dc = space.set_doms[self.c.index]
        space.set_restrict(self.c.index, da.glb - db.lub, da.lub - db.glb)
        if space.failed:
            return Status.FIX
        dc = space.set_doms[self.c.index]
        space.set_restrict(self.a.index, dc.glb, dc.lub | db.lub)
        if space.failed:
            return Status.FIX
        da = space.set_doms[self.a.index]
        space.set_restrict(self.b.index, da.glb - dc.lub, db.lub - dc.glb)
        if space.failed:
            return Status.FIX
        if all(space.set_doms[v.index].assigned for v in (self.a, self.b, self.c)):
            return Status.SUBSUMED
        return Status.FIX


class ReifiedLeaf(Propagator):
    """b = 1 iff leaf holds; full reification on a single guard leaf."""

    __slots__ = ("leaf", "b")

    def __init__(self, leaf, b: VarId):
        self.leaf, self.b = leaf, b

    def var_keys(self):
        keys = [var_key(self.b)]
        leaf = self.leaf
        for side in ("lhs", "rhs", "sv"):
            v = getattr(leaf, side, None)
            if isinstance(v, VarId):
                keys.append(var_key(v))
        return tuple(keys)

    def _impose(self, space, positive: bool):
        from . import store

        leaf = self.leaf
        if isinstance(leaf, SetIn):
            store.post_member(space, leaf.elt, leaf.sv, negated=not positive)
            return
        ops = {Eq: "=", Gq: ">=", Gt: ">"}
        op = ops[type(leaf)]
        if not positive:
            from .syntax import NEGATE

            op = NEGATE[op]
        store.post_rel(space, leaf.lhs, op, leaf.rhs)

    def propagate(self, space) -> Status:
        db = space.int_doms[self.b.index]
        if db.assigned:
            self._impose(space, db.value == 1)
            return Status.SUBSUMED
        st = leaf_status(space, self.leaf)
        if st is None:
            return Status.FIX
        space.narrow_int(self.b.index, db.clamp(1, 1) if st else db.clamp(0, 0))
        return Status.SUBSUMED


class BoolAnd(Propagator):
    """b = min(bs): conjunction over truth variables."""

    __slots__ = ("bs", "b")

    def __init__(self, bs, b: VarId):
        self.bs, self.b = tuple(bs), b

    def var_keys(self):
        return tuple(var_key(x) for x in (*self.bs, self.b))

    def propagate(self, space) -> Status:
        db = space.int_doms[self.b.index]
        doms = [space.int_doms[x.index] for x in self.bs]
        if any(d.assigned and d.value == 0 for d in doms):
            space.narrow_int(self.b.index, db.clamp(0, 0))
            return Status.SUBSUMED
        if all(d.assigned and d.value == 1 for d in doms):
            space.narrow_int(self.b.index, db.clamp(1, 1))
            return Status.SUBSUMED
        if db.assigned:
            if db.value == 1:
                for x in self.bs:
                    space.narrow_int(x.index, space.int_doms[x.index].clamp(1, 1))
                return Status.SUBSUMED
            undecided = [x for x, d in zip(self.bs, doms) if not d.assigned]
            if len(undecided) == 1:
                space.narrow_int(undecided[0].index, space.int_doms[undecided[0].index].clamp(0, 0))
                return Status.SUBSUMED
        return Status.FIX


class BoolOr(Propagator):
    """b = max(bs): disjunction over truth variables."""

    __slots__ = ("bs", "b")

    def __init__(self, bs, b: VarId):
        self.bs, self.b = tuple(bs), b

    def var_keys(self):
        return tuple(var_key(x) for x in (*self.bs, self.b))

    def propagate(self, space) -> Status:
        db = space.int_doms[self.b.index]
        doms = [space.int_doms[x.index] for x in self.bs]
        if any(d.assigned and d.value == 1 for d in doms):
            space.narrow_int(self.b.index, db.clamp(1, 1))
            return Status.SUBSUMED
        if all(d.assigned and d.value == 0 for d in doms):
            space.narrow_int(self.b.index, db.clamp(0, 0))
            return Status.SUBSUMED
        if db.assigned:
            if db.value == 0:
                for x in self.bs:
                    space.narrow_int(x.index, space.int_doms[x.index].clamp(0, 0))
                return Status.SUBSUMED
            undecided = [x for x, d in zip(self.bs, doms) if not d.assigned]
            if len(undecided) == 1:
                space.narrow_int(undecided[0].index, space.int_doms[undecided[0].index].clamp(1, 1))
                return Status.SUBSUMED
        return Status.FIX


class BoolNot(Propagator):
    """b = 1 - bg."""

    __slots__ = ("bg", "b")

    def __init__(self, bg: VarId, b: VarId):
        self.bg, self.b = bg, b

    def var_keys(self):
        return (var_key(self.bg), var_key(self.b))

    def propagate(self, space) -> Status:
        dg = space.int_doms[self.bg.index]
        db = space.int_doms[self.b.index]
        if dg.assigned:
            v = 1 - dg.value
            space.narrow_int(self.b.index, db.clamp(v, v))
            return Status.SUBSUMED
        if db.assigned:
            v = 1 - db.value
            space.narrow_int(self.bg.index, dg.clamp(v, v))
            return Status.SUBSUMED
        return Status.FIX


class AskProp(Propagator):
    """Runs a continuation when its truth variable becomes 1.

    The continuation executes inside propagation: it only posts new tells and
    propagators into the space, never requests a nested fixpoint, so a long
    cascade of asks unwinds iteratively in the propagation queue.
    """

    __slots__ = ("b", "thunk", "label")

    def __init__(self, b: VarId, thunk, label: str = ""):
        self.b, self.thunk, self.label = b, thunk, label

    def var_keys(self):
        return (var_key(self.b),)

    def propagate(self, space) -> Status:
        db = space.int_doms[self.b.index]
        if not db.assigned:
            return Status.FIX
        if db.value == 1:
            space.asks_fired += 1
            self.thunk(space)
        return Status.SUBSUMED


class ParCond(Propagator):
    """Guarded choice: fires the first branch (in pre-shuffled order) whose
    truth variable is 1 at the moment this propagator runs; subsumes when all
    are 0. Undecided guards leave it at fixpoint, to be discarded with the
    space at the end of the unit."""

    __slots__ = ("bs", "thunks", "label")

    def __init__(self, bs, thunks, label: str = ""):
        self.bs, self.thunks, self.label = tuple(bs), tuple(thunks), label

    def var_keys(self):
        return tuple(var_key(b) for b in self.bs)

    def propagate(self, space) -> Status:
        undecided = False
        for b, thunk in zip(self.bs, self.thunks):
            d = space.int_doms[b.index]
            if d.assigned and d.value == 1:
                space.asks_fired += 1
                thunk(space)
                return Status.SUBSUMED
            if not d.assigned:
                undecided = True
        return Status.FIX if undecided else Status.SUBSUMED
