"""Copy-based depth-first search and branch-and-bound over spaces.

A choice point clones the space: the left child adds x = v, the right child
adds x != v, and exploration is leftmost-first. A solution is a space at
fixpoint with every branched variable assigned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import store
from .errors import ArityError
from .store import Space, SpaceStatus
from .syntax import VarId

VAR_RULES = ("in_order", "smallest")
VAL_RULES = ("min", "max")


@dataclass(frozen=True)
class Branching:
    xs: tuple[VarId, ...]
    var_rule: str = "in_order"
    val_rule: str = "min"

    def __post_init__(self):
        if self.var_rule not in VAR_RULES:
            raise ArityError(f"unknown variable selection rule {self.var_rule!r}")
        if self.val_rule not in VAL_RULES:
            raise ArityError(f"unknown value selection rule {self.val_rule!r}")


def post_branching(space: Space, branching: Branching):
    space.branching = branching


@dataclass
class SearchStats:
    nodes: int = 0
    failures: int = 0
    solutions: int = 0


def _select(space: Space, b: Branching) -> VarId | None:
    pick = None
    best = None
    for x in b.xs:
        d = space.int_doms[x.index]
        if d.assigned:
            continue
        if b.var_rule == "in_order":
            return x
        size = d.size()
        if best is None or size < best:
            pick, best = x, size
    return pick


class DfsEngine:
    """Iterator over all solutions of a space with a posted branching."""

    def __init__(self, root: Space):
        if root.branching is None:
            raise ArityError("space has no branching posted")
        self.stack: list[Space] = [root.clone()]
        self.stats = SearchStats()

    def next_solution(self) -> Space | None:
        while self.stack:
            space = self.stack.pop()
            self.stats.nodes += 1
            if space.propagate_to_fixpoint() is SpaceStatus.FAILED:
                self.stats.failures += 1
                continue
            b: Branching = space.branching
            x = _select(space, b)
            if x is None:
                self.stats.solutions += 1
                return space
            d = space.int_doms[x.index]
            v = d.min if b.val_rule == "min" else d.max
            left = space.clone()
            store.post_rel(left, x, "=", v)
            store.post_rel(space, x, "!=", v)
            self.stack.append(space)  # explored after the left branch
            self.stack.append(left)
        return None

    def __iter__(self):
        while (s := self.next_solution()) is not None:
            yield s


def dfs_next(engine: DfsEngine) -> Space | None:
    return engine.next_solution()


class BabEngine:
    """Branch and bound: each returned solution strictly improves cost_var."""

    def __init__(self, root: Space, cost_var: VarId):
        if root.branching is None:
            raise ArityError("space has no branching posted")
        self.cost_var = cost_var
        self.stack: list[Space] = [root.clone()]
        self.best: int | None = None
        self.stats = SearchStats()

    def next_solution(self) -> Space | None:
        while self.stack:
            space = self.stack.pop()
            self.stats.nodes += 1
            if self.best is not None:
                store.post_rel(space, self.cost_var, "<", self.best)
            if space.propagate_to_fixpoint() is SpaceStatus.FAILED:
                self.stats.failures += 1
                continue
            b: Branching = space.branching
            x = _select(space, b)
            if x is None:
                cd = space.int_doms[self.cost_var.index]
                if not cd.assigned:
                    # pin the cost at its lower bound so the bound is concrete
                    store.post_rel(space, self.cost_var, "=", cd.min)
                    if space.propagate_to_fixpoint() is SpaceStatus.FAILED:
                        self.stats.failures += 1
                        continue
                self.best = space.int_doms[self.cost_var.index].value
                self.stats.solutions += 1
                return space
            d = space.int_doms[x.index]
            v = d.min if b.val_rule == "min" else d.max
            left = space.clone()
            store.post_rel(left, x, "=", v)
            store.post_rel(space, x, "!=", v)
            self.stack.append(space)
            self.stack.append(left)
        return None

    def __iter__(self):
        while (s := self.next_solution()) is not None:
            yield s


def bab_best(root: Space, cost_var: VarId) -> Space | None:
    """Run branch and bound to exhaustion; returns the optimal solution."""
    eng = BabEngine(root, cost_var)
    best = None
    for s in eng:
        best = s
    return best
