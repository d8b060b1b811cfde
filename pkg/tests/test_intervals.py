import math

import pytest
from hypothesis import given, strategies as st

from dynadapt.errors import ArgumentError
from dynadapt.intervals import (Interval, cover, dgc_containing, dgc_starting_at, gc_containing,
                                gc_starting_at, is_member, max_dgc_level, satisfies_halving, split_cover)


def spans(ivs):
    return [iv.as_tuple() for iv in ivs]


def brute_dgc(T):
    out = set()
    for k in range(max_dgc_level(T) + 1):
        L = 1 << k
        for i in range(1, T // L + 2):
            out.add(((i - 1) * L + 1, i * L))
    return out


def brute_gc(limit):
    out = set()
    for k in range(limit.bit_length()):
        L = 1 << k
        for i in range(1, limit // L + 2):
            out.add((i * L, (i + 1) * L - 1))
    return out


@pytest.mark.parametrize("t, T, expected", [
    (1, 16, [(1, 1), (1, 2), (1, 4), (1, 8), (1, 16)]),
    (3, 16, [(3, 3), (3, 4)]),
    (5, 8, [(5, 5), (5, 6), (5, 8)]),
])
def test_dgc_starting_at(t, T, expected):
    assert spans(dgc_starting_at(t, T)) == expected


@pytest.mark.parametrize("t, expected", [
    (1, [(1, 1)]),
    (2, [(2, 2), (2, 3)]),
    (8, [(8, 8), (8, 9), (8, 11), (8, 15)]),
])
def test_gc_starting_at(t, expected):
    assert spans(gc_starting_at(t)) == expected


@pytest.mark.parametrize("r, s, system, T, expected", [
    (1, 5, "dgc", 8, [(1, 4), (5, 5)]),
    (2, 7, "gc", None, [(2, 3), (4, 7)]),
    (4, 4, "gc", None, [(4, 4)]),
])
def test_cover_examples(r, s, system, T, expected):
    assert spans(cover(r, s, system, T)) == expected


def test_starting_sets_match_brute_enumeration():
    T = 64
    dgc = brute_dgc(T)
    gc = brute_gc(T)
    for t in range(1, T + 1):
        assert set(spans(dgc_starting_at(t, T))) == {iv for iv in dgc if iv[0] == t}
        assert set(spans(gc_starting_at(t))) == {iv for iv in gc if iv[0] == t}


def test_containment_counts():
    T = 100
    for t in range(1, T + 1):
        assert len(dgc_containing(t, T)) == math.floor(math.log2(T)) + 1
        assert len(gc_containing(t)) == math.floor(math.log2(t)) + 1
        assert all(t in iv for iv in dgc_containing(t, T) + gc_containing(t))


def test_each_dgc_level_partitions_rounds():
    T = 37
    for k in range(max_dgc_level(T) + 1):
        covered = [t for t in range(1, T + 1) for iv in dgc_containing(t, T) if iv.level == k]
        assert covered == list(range(1, T + 1))


def test_dgc_minus_round_one_is_shifted_gc():
    N = 200
    dgc = {iv for iv in brute_dgc(N) if iv[0] > 1 and iv[1] <= N}
    shifted = {(a + 1, b + 1) for a, b in brute_gc(N) if b + 1 <= N}
    assert dgc == shifted


def assert_valid_cover(seq, r, s, system, T):
    assert seq[0].start == r and seq[-1].end == s
    assert all(a.end + 1 == b.start for a, b in zip(seq, seq[1:]))
    assert all(is_member(iv, system, T) for iv in seq)
    assert satisfies_halving(seq)


def test_exhaustive_covers_128():
    T = 128
    for r in range(1, T + 1):
        for s in range(r, T + 1):
            assert_valid_cover(cover(r, s, "dgc", T), r, s, "dgc", T)
            assert_valid_cover(cover(r, s, "gc"), r, s, "gc", None)


@given(st.integers(1, 5000), st.integers(0, 5000))
def test_cover_sqrt_sum(r, extra):
    s = r + extra
    for seq in (cover(r, s, "gc"), cover(r, s, "dgc", 10_000)):
        # growing and shrinking halves are geometric, so the sum of roots is at most 2 * 2 sqrt(|I|)
        total = sum(math.sqrt(iv.length) for iv in seq)
        assert total <= 4 * math.sqrt(s - r + 1) + 1e-9


def test_split_cover_peak():
    left, right = split_cover(cover(3, 30, "gc"))
    assert max(iv.level for iv in left) == left[-1].level
    assert all(iv.level <= left[-1].level for iv in right)


def test_halving_detects_violation():
    assert not satisfies_halving([Interval(1, 1), Interval(3, 1), Interval(5, 1), Interval(7, 1)])


def test_interval_ordering_and_str():
    assert str(Interval(4, 2)) == "[4,7]"
    assert Interval(1, 3) < Interval(2, 0)


@pytest.mark.parametrize("call", [
    lambda: dgc_starting_at(0, 8),
    lambda: gc_starting_at(0),
    lambda: cover(5, 4, "gc"),
    lambda: cover(1, 9, "dgc", 8),
    lambda: cover(1, 3, "dgc"),
    lambda: Interval(0, 1),
])
def test_argument_errors(call):
    with pytest.raises(ArgumentError):
        call()
