import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dynadapt import AnhRecord, anh_weight, combine_actions, normalize_weights, potential
from dynadapt.anh import log_anh_weight
from dynadapt.errors import ArgumentError, NumericError


def test_potential_examples():
    assert potential(0, 0) == 1.0
    assert potential(-5, 7) == 1.0
    assert potential(1, 1) == pytest.approx(math.exp(1 / 3))
    assert potential(1, 1) == pytest.approx(1.395612, abs=1e-6)


def test_weight_examples():
    assert anh_weight(0, 0) == pytest.approx(0.197806, abs=1e-6)
    assert anh_weight(-3, 5) == 0.0
    # (e - e^(1/9)) / 2
    assert anh_weight(2, 2) == pytest.approx(0.5 * (math.e - math.exp(1 / 9)), rel=1e-15)
    assert anh_weight(2, 2) == pytest.approx(0.800381, abs=1e-6)


def test_potential_rejects_negative_c():
    with pytest.raises(ArgumentError):
        potential(1.0, -0.5)


def test_uniform_for_fresh_records():
    p = normalize_weights({i: AnhRecord() for i in range(3)})
    assert all(v == pytest.approx(1 / 3) for v in p.values())


def test_zero_weight_expert():
    assert normalize_weights({"a": AnhRecord(1, 1), "b": AnhRecord(-1, 1)}) == {"a": 1.0, "b": 0.0}


def test_two_expert_proportions():
    p = normalize_weights({"a": AnhRecord(2, 2), "b": AnhRecord(0, 2)})
    wa = 0.5 * (math.e - math.exp(1 / 9))
    wb = 0.5 * (math.exp(1 / 9) - 1)
    assert p["a"] == pytest.approx(wa / (wa + wb), rel=1e-14)
    assert (round(p["a"], 3), round(p["b"], 3)) == (0.932, 0.068)


def test_all_zero_weights_fall_back_to_uniform():
    p = normalize_weights({"a": AnhRecord(-5, 5), "b": AnhRecord(-3, 4)})
    assert p == {"a": 0.5, "b": 0.5}


def test_empty_records():
    with pytest.raises(ArgumentError):
        normalize_weights({})


def test_large_records_stay_finite():
    p = normalize_weights({"a": AnhRecord(3000, 3000), "b": AnhRecord(2990, 3000), "c": AnhRecord(0, 10)})
    assert all(math.isfinite(v) for v in p.values())
    assert math.fsum(p.values()) == pytest.approx(1.0, abs=1e-12)
    assert p["a"] > p["b"] > p["c"] == 0.0 or p["c"] < 1e-300


def test_log_weight_agrees_with_direct():
    for R, C in [(0, 0), (2, 2), (5.5, 9), (-0.5, 3), (30, 40)]:
        assert log_anh_weight(R, C) == pytest.approx(math.log(anh_weight(R, C)), rel=1e-12)
    assert log_anh_weight(-3, 5) == -math.inf


# C accumulates |r|, so every reachable record has |R| <= C
records = st.tuples(st.floats(-1, 1), st.floats(0, 5000)).map(lambda x: AnhRecord(x[0] * x[1], x[1]))


@given(st.lists(records, min_size=1, max_size=8))
def test_normalized_is_distribution(recs):
    recs = dict(enumerate(recs))
    p = normalize_weights(recs)
    assert all(v >= 0 for v in p.values())
    assert math.fsum(p.values()) == pytest.approx(1.0, abs=1e-12)


@given(st.lists(st.floats(0, 400), min_size=2, max_size=6), st.floats(1, 50))
def test_direct_and_log_paths_agree(Rs, scale):
    recs = {i: AnhRecord(R, R * scale + 1) for i, R in enumerate(Rs)}
    direct = normalize_weights(recs)
    logs = [log_anh_weight(r.R, r.C) for r in recs.values()]
    peak = max(logs)
    raw = [0.0 if x == -math.inf else math.exp(x - peak) for x in logs]
    for i, x in enumerate(raw):
        assert direct[i] == pytest.approx(x / math.fsum(raw), rel=1e-9, abs=1e-300)


@given(st.floats(0, 1), st.floats(0, 1e3))
def test_weight_nondecreasing_in_regret(frac, C):
    R = frac * C
    assert log_anh_weight(R + 1, C + 1) >= log_anh_weight(R, C + 1)


def test_overflowing_potential_is_numeric_error():
    with pytest.raises(NumericError):
        potential(64.0, 1.0)


def test_combine_examples():
    assert combine_actions({"x": 0.3}, {"x": np.array([0.7])})[0] == 0.7
    out = combine_actions({"a": 0.25, "b": 0.75}, {"a": np.array([0.0]), "b": np.array([1.0])})
    assert out[0] == 0.75
    p = np.array([0.2, -0.4])
    out = combine_actions({1: 0.1, 2: 0.3, 3: 0.6}, {1: p, 2: p, 3: p})
    assert np.allclose(out, p, atol=1e-15)


def test_combine_key_mismatch():
    with pytest.raises(ArgumentError):
        combine_actions({"a": 1.0}, {"b": np.zeros(1)})


def test_advance():
    r = AnhRecord().advance(0.3, 0.5).advance(0.6, 0.1)
    assert r.R == pytest.approx(0.3)
    assert r.C == pytest.approx(0.7)
