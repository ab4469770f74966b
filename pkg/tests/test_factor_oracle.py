"""Factor oracle construction and queries."""

import json
import random

import pytest

from tellask.errors import RangeError
from tellask.factor_oracle import FactorOracle, brute_factors, build


def test_two_symbol_oracle_exactly():
    fo = FactorOracle("ab")
    assert fo.m == 2
    assert fo.delta == {(0, "a"): 1, (1, "b"): 2, (0, "b"): 2}
    assert fo.S == [-1, 0, 0]


def test_three_symbol_oracle_exactly():
    fo = FactorOracle("abb")
    assert fo.m == 3
    assert fo.delta == {(0, "a"): 1, (1, "b"): 2, (0, "b"): 2, (2, "b"): 3}
    assert fo.S == [-1, 0, 0, 2]


def test_empty_oracle():
    fo = FactorOracle()
    assert fo.m == 0
    assert fo.is_factor("")
    assert not fo.is_factor("a")
    assert fo.suffix(0) == -1


def test_incremental_equals_batch():
    batch = FactorOracle("abbab")
    inc = FactorOracle()
    for ch in "abbab":
        inc.add(ch)
    assert inc == batch
    assert inc != FactorOracle("abbaa")


def test_every_factor_is_accepted():
    rng = random.Random(7)
    for _ in range(100):
        n = rng.randint(0, 8)
        seq = tuple(rng.choice("abc") for _ in range(n))
        fo = FactorOracle(seq)
        for factor in brute_factors(seq):
            assert fo.is_factor(factor), (seq, factor)


def test_oracle_overgenerates():
    # the automaton is an over-approximation: for abbc it also accepts abc
    fo = FactorOracle("abbc")
    assert fo.is_factor("abc")
    assert ("a", "b", "c") not in brute_factors("abbc")


def test_brute_factors_small_case():
    assert brute_factors("ab") == {(), ("a",), ("b",), ("a", "b")}


def test_navigation_queries():
    fo = FactorOracle("abb")
    assert fo.transitions(0) == {"a": 1, "b": 2}
    assert fo.step(0, "a") == 1
    assert fo.step(1, "a") is None
    assert fo.suffix(3) == 2
    assert build("abb") == fo


@pytest.mark.parametrize("state", [-1, 4, 99])
def test_state_range_is_checked(state):
    fo = FactorOracle("abb")
    for query in (fo.transitions, fo.suffix, lambda s: fo.step(s, "a")):
        with pytest.raises(RangeError):
            query(state)


def test_link_counts_stay_linear():
    rng = random.Random(11)
    for n in (500, 1000, 2000):
        seq = [rng.randint(0, 3) for _ in range(n)]
        fo = FactorOracle(seq)
        assert n <= len(fo.delta) <= 2 * n - 1
        assert fo.chain_steps <= 2 * n


def test_dot_export():
    dot = FactorOracle("ab").to_dot()
    assert dot.startswith("digraph factor_oracle {")
    assert '0 -> 1 [label="a"]' in dot
    assert "1 -> 0 [style=dashed]" in dot
    assert dot.endswith("}\n")


def test_json_export():
    data = json.loads(FactorOracle("abb").to_json())
    assert data["m"] == 3
    assert data["suffix"] == [-1, 0, 0, 2]
    assert data["delta"] == [[0, "a", 1], [0, "b", 2], [1, "b", 2], [2, "b", 3]]


def test_integer_alphabet():
    fo = FactorOracle((60, 62, 60))
    assert fo.m == 3
    assert fo.is_factor((62, 60))
    assert not fo.is_factor((60, 60))
