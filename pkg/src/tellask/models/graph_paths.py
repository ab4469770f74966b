"""Concurrent path finding over a directed graph.

One small concurrent program per edge: forward signals spread from the source
along edges, backward signals spread from the target against edges, and an
edge seeing both signals declares that a path exists and records its head in
the tail's successor set. A single propagation fixpoint answers reachability;
a concrete path is then read off the successor sets smallest-head-first.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import store
from ..errors import ConfigError
from ..kernel import ArrayDecl, LocalDecl, run_ccp
from ..syntax import And, Eq, Member, Par, Rel, Tell, VarRef, When


@dataclass(frozen=True)
class GraphSpec:
    edges: frozenset          # ordered pairs (i, j)
    a: int                    # source vertex
    b: int                    # target vertex

    @staticmethod
    def make(edges, a, b) -> "GraphSpec":
        pairs = frozenset((int(i), int(j)) for i, j in edges)
        for i, j in pairs:
            if i < 0 or j < 0:
                raise ConfigError(f"vertex ids must be non-negative, got ({i}, {j})")
        if a < 0 or b < 0:
            raise ConfigError("endpoints must be non-negative")
        return GraphSpec(pairs, int(a), int(b))


@dataclass(frozen=True)
class PathResult:
    found: bool
    path: tuple | None        # vertex walk a..b when found


def parse_edges(text: str):
    """Edge list, one "i j" pair per line; # starts a comment."""
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"line {lineno}: expected 'i j', got {raw!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return edges


def _edge_process(i: int, j: int):
    fwd_i = VarRef("fwd", i)
    return Par((
        When(Eq(fwd_i, 1), Tell(Rel(VarRef("fwd", j), "=", 1))),
        When(Eq(VarRef("back", j), 1), Tell(Rel(VarRef("back", i), "=", 1))),
        When(And((Eq(fwd_i, 1), Eq(VarRef("back", j), 1))),
             Par((Tell(Rel(VarRef("path"), "=", 1)),
                  Tell(Member(j, VarRef("succ", i)))))),
    ))


def graph_path_run(spec: GraphSpec) -> PathResult:
    if spec.a == spec.b:
        return PathResult(True, (spec.a,))
    vertices = {spec.a, spec.b}
    for i, j in spec.edges:
        vertices.update((i, j))
    n = max(vertices) + 1
    decls = (
        ArrayDecl("fwd", "bool", n, 0, 1),
        ArrayDecl("back", "bool", n, 0, 1),
        ArrayDecl("succ", "set", n, 0, n - 1),
        LocalDecl("path", "bool", 0, 1),
    )
    procs = [_edge_process(i, j) for i, j in sorted(spec.edges)]
    procs.append(Tell(Rel(VarRef("fwd", spec.a), "=", 1)))
    procs.append(Tell(Rel(VarRef("back", spec.b), "=", 1)))
    snap = run_ccp(Par(tuple(procs)), decls)

    view = snap.vars["path"]
    if not (view.assigned and view.value == 1):
        return PathResult(False, None)

    # walk the successor sets, smallest head first, backtracking on repeats
    succs = {v: sorted(snap.vars[f"succ[{v}]"].glb) for v in range(n)}
    stack = [(spec.a, iter(succs[spec.a]))]
    visited = {spec.a}
    while stack:
        v, it = stack[-1]
        if v == spec.b:
            return PathResult(True, tuple(node for node, _ in stack))
        advanced = False
        for w in it:
            if w not in visited:
                visited.add(w)
                stack.append((w, iter(succs[w])))
                advanced = True
                break
        if not advanced:
            stack.pop()
    return PathResult(False, None)  # signals met but no walk: unreachable


def bfs_reachable(edges, a: int, b: int) -> bool:
    """Independent reachability check by breadth-first search."""
    adj = {}
    for i, j in edges:
        adj.setdefault(i, []).append(j)
    frontier, seen = [a], {a}
    while frontier:
        v = frontier.pop(0)
        if v == b:
            return True
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return False
