"""Transposition/inversion network CSP over pitch classes.

Given n pitch classes, choose a relation for every ordered pair of nodes:
0 (no edge), 1 (transposition) or 2 (inversion), as an n x n matrix with a
zero diagonal and mirror symmetry. A valid network has at least 2n cells
distinct from 0 and exactly 2K cells equal to 2. Solutions are enumerated by
depth-first search over the upper triangle and decoded into arrow labels:
a transposition from pitch a to pitch b is T((b-a) mod 12), an inversion
between a and b is I((a+b) mod 12).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

from .. import search, store
from ..errors import ConfigError
from ..search import Branching
from ..syntax import VarId


@dataclass(frozen=True)
class KnetProblem:
    pitches: tuple
    k: int

    @staticmethod
    def make(pitches, k: int) -> "KnetProblem":
        ps = tuple(int(p) for p in pitches)
        if len(ps) < 2:
            raise ConfigError("need at least two pitch classes")
        if any(not 0 <= p < 12 for p in ps):
            raise ConfigError(f"pitch classes live in 0..11, got {ps}")
        if k < 0:
            raise ConfigError("inversion count cannot be negative")
        return KnetProblem(ps, int(k))


def _build(problem: KnetProblem):
    n = len(problem.pitches)
    space = store.new_space()
    cells = [[space.new_int_var(0, 2) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        store.post_rel(space, cells[i][i], "=", 0)
        for j in range(i + 1, n):
            store.post_rel(space, cells[i][j], "=", cells[j][i])
    flat = [cells[i][j] for i in range(n) for j in range(n)]
    store.post_count(space, flat, 0, "<=", n * n - 2 * n)   # at least 2n non-zero
    store.post_count(space, flat, 2, "=", 2 * problem.k)    # exactly 2K inversions
    tri = tuple(cells[i][j] for i in range(n) for j in range(i + 1, n))
    search.post_branching(space, Branching(tri, "in_order", "min"))
    return space, cells


def _matrix(space, cells) -> tuple:
    return tuple(tuple(store.int_value(space, x) for x in row) for row in cells)


def knets_solve(problem: KnetProblem, limit: int | None = None) -> list:
    """All solution matrices (or the first `limit`), in search order."""
    space, cells = _build(problem)
    engine = search.DfsEngine(space)
    out = []
    while True:
        if limit is not None and len(out) >= limit:
            break
        sol = engine.next_solution()
        if sol is None:
            break
        out.append(_matrix(sol, cells))
    return out


def brute_force(problem: KnetProblem) -> list:
    """Every symmetric assignment checked against the constraints directly."""
    n = len(problem.pitches)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = []
    for combo in product((0, 1, 2), repeat=len(pairs)):
        m = [[0] * n for _ in range(n)]
        for (i, j), v in zip(pairs, combo):
            m[i][j] = m[j][i] = v
        nonzero = sum(1 for i in range(n) for j in range(n) if m[i][j] != 0)
        twos = sum(1 for i in range(n) for j in range(n) if m[i][j] == 2)
        if nonzero >= 2 * n and twos == 2 * problem.k:
            out.append(tuple(tuple(row) for row in m))
    return out


def decode(problem: KnetProblem, matrix) -> tuple:
    """Arrow labels for one solution; cell (i, j) describes the i->j arrow."""
    ps = problem.pitches
    n = len(ps)
    labels = []
    for i in range(n):
        row = []
        for j in range(n):
            v = matrix[i][j]
            if v == 0:
                row.append("--")
            elif v == 1:
                row.append(f"T{(ps[j] - ps[i]) % 12}")
            else:
                row.append(f"I{(ps[i] + ps[j]) % 12}")
        labels.append(tuple(row))
    return tuple(labels)


def is_connected(matrix) -> bool:
    """Do the non-zero edges connect all nodes? (extension, off by default)"""
    n = len(matrix)
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for w in range(n):
            if matrix[v][w] != 0 and w not in seen:
                seen.add(w)
                frontier.append(w)
    return len(seen) == n


def render(problem: KnetProblem, matrix) -> str:
    labels = decode(problem, matrix)
    width = max(len(cell) for row in labels for cell in row)
    head = "    " + " ".join(f"{p:>{width}}" for p in problem.pitches)
    lines = [head]
    for p, row in zip(problem.pitches, labels):
        lines.append(f"{p:>3} " + " ".join(f"{cell:>{width}}" for cell in row))
    return "\n".join(lines)


def to_json(problem: KnetProblem, matrices) -> str:
    return json.dumps({
        "pitches": list(problem.pitches),
        "k": problem.k,
        "count": len(matrices),
        "solutions": [
            {"matrix": [list(r) for r in m],
             "labels": [list(r) for r in decode(problem, m)]}
            for m in matrices
        ],
    })
