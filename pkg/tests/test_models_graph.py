"""Graph path model against breadth-first search."""

import random

import pytest

from tellask.errors import ConfigError
from tellask.models.graph_paths import GraphSpec, bfs_reachable, graph_path_run, parse_edges


def run(edges, a, b):
    return graph_path_run(GraphSpec.make(edges, a, b))


def is_walk(path, edges, a, b):
    if path[0] != a or path[-1] != b:
        return False
    if len(set(path)) != len(path):
        return False
    return all((i, j) in edges for i, j in zip(path, path[1:]))


def test_chain_is_found():
    result = run({(1, 2), (2, 3), (3, 5)}, 1, 5)
    assert result.found
    assert result.path == (1, 2, 3, 5)


def test_source_equals_target():
    result = run({(1, 2)}, 4, 4)
    assert result.found
    assert result.path == (4,)


def test_unreachable():
    result = run({(1, 2), (3, 4)}, 1, 4)
    assert not result.found
    assert result.path is None


def test_edges_are_directed():
    assert run({(2, 1)}, 1, 2).found is False
    assert run({(2, 1)}, 2, 1).found is True


def test_cycle_needs_backtracking():
    # smallest-head-first walks 1 -> 2 first, dead-ends on the cycle back to
    # 1, and must back out to find 1 -> 3 -> 5
    edges = {(1, 2), (2, 1), (1, 3), (3, 5)}
    result = run(edges, 1, 5)
    assert result.found
    assert is_walk(result.path, edges, 1, 5)


def test_random_graphs_agree_with_bfs():
    rng = random.Random(99)
    for trial in range(200):
        n = rng.randint(2, 12)
        edges = {
            (i, j)
            for i in range(n)
            for j in range(n)
            if i != j and rng.random() < 0.15
        }
        a, b = rng.randrange(n), rng.randrange(n)
        result = run(edges, a, b)
        assert result.found == bfs_reachable(edges, a, b), (edges, a, b)
        if result.found and a != b:
            assert is_walk(result.path, edges, a, b), (edges, a, b, result.path)


def test_make_rejects_bad_input():
    with pytest.raises(ConfigError):
        GraphSpec.make({(-1, 2)}, 0, 2)
    with pytest.raises(ConfigError):
        GraphSpec.make({(1, 2)}, -1, 2)


def test_parse_edges():
    text = "1 2\n# comment\n2 3   # trailing\n\n 3 5\n"
    assert parse_edges(text) == [(1, 2), (2, 3), (3, 5)]
    with pytest.raises(ConfigError):
        parse_edges("1 2 3")
    with pytest.raises(ValueError):
        parse_edges("a b")
