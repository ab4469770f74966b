"""DFS and branch-and-bound over cloned spaces."""

import itertools

import pytest

from tellask.errors import ArityError
from tellask.search import BabEngine, Branching, DfsEngine, bab_best, dfs_next, post_branching
from tellask.store import (
    int_value,
    new_int_var,
    new_space,
    post_distinct,
    post_linear,
    post_rel,
)


def add14_space(val_rule="min"):
    s = new_space()
    x = new_int_var(s, 0, 11)
    y = new_int_var(s, 0, 11)
    post_linear(s, (1, 1), (x, y), "=", 14)
    post_branching(s, Branching((x, y), "in_order", val_rule))
    return s, x, y


def test_add14_first_solution():
    s, x, y = add14_space()
    sol = dfs_next(DfsEngine(s))
    assert (int_value(sol, x), int_value(sol, y)) == (3, 11)


def test_add14_all_solutions_in_order():
    s, x, y = add14_space()
    pairs = [(int_value(sol, x), int_value(sol, y)) for sol in DfsEngine(s)]
    assert pairs == [(v, 14 - v) for v in range(3, 12)]
    assert len(pairs) == 9


def test_max_value_rule_flips_order():
    s, x, y = add14_space("max")
    sol = dfs_next(DfsEngine(s))
    assert (int_value(sol, x), int_value(sol, y)) == (11, 3)


def queens_space(n):
    s = new_space()
    qs = [new_int_var(s, 0, n - 1) for _ in range(n)]
    post_distinct(s, qs)
    post_distinct(s, qs, offsets=list(range(n)))          # rising diagonals
    post_distinct(s, qs, offsets=[-i for i in range(n)])  # falling diagonals
    post_branching(s, Branching(tuple(qs), "in_order", "min"))
    return s, qs


def queens_brute(n):
    count = 0
    for perm in itertools.permutations(range(n)):
        if len({perm[i] + i for i in range(n)}) == n and len({perm[i] - i for i in range(n)}) == n:
            count += 1
    return count


def test_four_queens_two_solutions():
    s, qs = queens_space(4)
    sols = [[int_value(sol, q) for q in qs] for sol in DfsEngine(s)]
    assert len(sols) == 2 == queens_brute(4)
    assert sols[0] == [1, 3, 0, 2] and sols[1] == [2, 0, 3, 1]


@pytest.mark.parametrize("n", [5, 6])
def test_queens_counts_match_brute_force(n):
    s, _ = queens_space(n)
    assert sum(1 for _ in DfsEngine(s)) == queens_brute(n)


def test_all_assigned_root_yields_one_solution():
    s = new_space()
    x = new_int_var(s, 4, 4)
    post_branching(s, Branching((x,)))
    eng = DfsEngine(s)
    assert dfs_next(eng) is not None
    assert dfs_next(eng) is None


def test_failed_root_yields_none():
    s = new_space()
    x = new_int_var(s, 0, 3)
    post_rel(s, x, ">", 9)
    post_branching(s, Branching((x,)))
    assert dfs_next(DfsEngine(s)) is None


def test_engine_requires_branching():
    with pytest.raises(ArityError):
        DfsEngine(new_space())


def test_no_duplicate_solutions_and_node_accounting():
    s, _, _ = add14_space()
    eng = DfsEngine(s)
    seen = set()
    for sol in eng:
        key = tuple(d.value for d in sol.int_doms)
        assert key not in seen
        seen.add(key)
    assert eng.stats.nodes >= eng.stats.solutions == 9


def test_smallest_domain_rule():
    s = new_space()
    wide = new_int_var(s, 0, 9)
    narrow = new_int_var(s, 0, 1)
    post_branching(s, Branching((wide, narrow), "smallest", "min"))
    sol = dfs_next(DfsEngine(s))
    assert sol is not None  # picks narrow first; still enumerates fine


def test_bab_minimize_simple():
    s = new_space()
    x = new_int_var(s, 2, 9)
    post_rel(s, x, ">=", 5)
    post_branching(s, Branching((x,), "in_order", "max"))  # start from bad solutions
    best = bab_best(s, x)
    assert int_value(best, x) == 5


def test_bab_improves_strictly():
    s = new_space()
    x = new_int_var(s, 0, 11)
    y = new_int_var(s, 0, 11)
    post_linear(s, (1, 1), (x, y), "=", 14)
    post_branching(s, Branching((x, y), "in_order", "max"))
    eng = BabEngine(s, x)
    costs = [int_value(sol, x) for sol in eng]
    assert costs == sorted(costs, reverse=True)
    assert len(costs) == len(set(costs))
    assert costs[-1] == 3  # optimum: matches min over the DFS enumeration


def test_bab_infeasible_root():
    s = new_space()
    x = new_int_var(s, 0, 3)
    post_rel(s, x, ">", 7)
    post_branching(s, Branching((x,)))
    assert bab_best(s, x) is None
