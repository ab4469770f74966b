import pytest

from tellask.domains import INT_MAX, INT_MIN, IntDomain, SetDomain
from tellask.errors import BoundsError, DomainError


def test_range_basics():
    d = IntDomain.range(0, 11)
    assert d.min == 0 and d.max == 11
    assert d.size() == 12
    assert not d.assigned
    assert 5 in d and 12 not in d


def test_singleton_assigned():
    d = IntDomain.range(5, 5)
    assert d.assigned and d.value == 5


def test_bounds_validation():
    with pytest.raises(BoundsError):
        IntDomain.range(4, 3)
    with pytest.raises(BoundsError):
        IntDomain.range(INT_MIN - 1, 0)
    IntDomain.range(INT_MIN, INT_MAX)  # extreme but legal


def test_remove_splits_interval():
    d = IntDomain.range(0, 9).remove(4)
    assert 4 not in d
    assert d.size() == 9
    assert d.min == 0 and d.max == 9
    assert sorted(d.values()) == [0, 1, 2, 3, 5, 6, 7, 8, 9]


def test_remove_endpoint_and_missing():
    d = IntDomain.range(0, 3)
    assert d.remove(0).min == 1
    assert d.remove(3).max == 2
    assert d.remove(7) is d  # no-op keeps identity


def test_clamp_and_intersect():
    d = IntDomain.range(0, 9).clamp(3, 20)
    assert (d.min, d.max) == (3, 9)
    e = IntDomain.range(0, 9).remove(5).intersect(IntDomain.range(4, 7))
    assert sorted(e.values()) == [4, 6, 7]


def test_empty_after_clamp():
    assert IntDomain.range(0, 3).clamp(5, 9).empty


def test_intersection_is_monotone():
    base = IntDomain.range(-8, 8)
    cur = base
    for other in (IntDomain.range(-5, 7), IntDomain.range(-5, 7).remove(0), IntDomain.range(-2, 99)):
        nxt = cur.intersect(other)
        assert set(nxt.values()) <= set(cur.values())
        cur = nxt


def test_set_domain_make_and_order():
    s = SetDomain.make({1, 2}, {1, 2, 3, 4})
    assert not s.assigned
    assert s.include(3).glb == frozenset({1, 2, 3})
    assert s.exclude(4).lub == frozenset({1, 2, 3})


def test_set_domain_assigned():
    s = SetDomain.make({1, 2}, {1, 2})
    assert s.assigned


def test_set_domain_glb_outside_lub():
    with pytest.raises(DomainError):
        SetDomain.make({9}, {1, 2})


def test_set_contradictions_return_none():
    s = SetDomain.make({1}, {1, 2})
    assert s.exclude(1) is None           # removing a known member
    assert s.include(7) is None           # adding an impossible member
    assert s.restrict(frozenset({5}), frozenset({1, 2})) is None
