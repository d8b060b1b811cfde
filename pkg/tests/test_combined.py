import math

import numpy as np
import pytest

from dynadapt import AOA, AOD, Box, run_game
from dynadapt.errors import ArgumentError, ProtocolError
from dynadapt.intervals import Interval

from conftest import abs_env, env
from reference_aod import reference_aod


def test_aod_first_round():
    box = Box(0, 1, 1)
    aod = AOD(box, 1.0, 4, record=True)
    assert aod.act()[0] == 0.0
    assert sorted(s.interval.as_tuple() for s in aod.slots.values()) == [(1, 1), (1, 2), (1, 4)]
    aod.observe(abs_env([0.5]).losses[0])
    assert np.allclose(aod.round_info.weights, 1 / 3)


def test_aod_matches_naive_reference_T16():
    e = env("abrupt", 16, seed=1)
    trace = run_game(AOD(e.domain, e.lipschitz, 16), e)
    ref = reference_aod([float(f.theta[0]) for f in e.losses], 16)
    assert trace.actions.ravel().tolist() == ref


@pytest.mark.parametrize("T", [5, 31, 100])
def test_aod_matches_naive_reference_other_horizons(T):
    e = env("abrupt", T, seed=T, segments=3)
    trace = run_game(AOD(e.domain, e.lipschitz, T), e)
    assert trace.actions.ravel().tolist() == reference_aod([float(f.theta[0]) for f in e.losses], T)


def test_aod_warm_start_and_active_count():
    T = 64
    e = env("drift", T, seed=0, dimension=2)
    aod = AOD(e.domain, e.lipschitz, T, record=True)
    held = {}
    for t, f in enumerate(e.losses, start=1):
        aod.act()
        for new, old, point in aod._pending["warm"]:
            assert new.level == old.level and old.end == t - 1 and new.start == t
            assert np.array_equal(point, held[old.level])
            assert np.array_equal(aod.slots[new.level].learner.current, point)
        assert aod.n_active == math.floor(math.log2(T)) + 1
        aod.observe(f)
        held = {lvl: s.learner.current.copy() for lvl, s in aod.slots.items()}


def test_aod_retired_expert_not_weighted():
    T = 8
    e = env("abrupt", T, seed=2)
    trace = run_game(AOD(e.domain, e.lipschitz, T, record=True), e)
    for info in trace.rounds:
        assert all(info.t in iv for iv in info.intervals)
        assert info.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_aod_beyond_horizon():
    e = env("stationary", 4)
    aod = AOD(e.domain, e.lipschitz, 4)
    run_game(aod, e)
    with pytest.raises(ProtocolError):
        aod.act()


def test_aod_rejects_bad_horizon():
    with pytest.raises(ArgumentError):
        AOD(Box(0, 1, 1), 1.0, 0)


def test_aoa_expert_sets():
    e = env("abrupt", 12, seed=4)
    aoa = AOA(e.domain, e.lipschitz, record=True)
    aoa.act()
    assert list(aoa.slots) == [Interval(1, 0)]
    aoa.observe(e.losses[0])
    assert aoa.round_info.removed == (Interval(1, 0),)
    assert aoa.slots == {}
    aoa.act()
    assert sorted(iv.as_tuple() for iv in aoa.slots) == [(2, 2), (2, 3)]
    for f in e.losses[1:7]:
        aoa.observe(f)
        aoa.act()
    assert sorted(iv.as_tuple() for iv in aoa._pending["created"]) == [(8, 8), (8, 9), (8, 11), (8, 15)]


def test_aoa_removed_experts_skip_update():
    e = env("abrupt", 40, seed=6)
    trace = run_game(AOA(e.domain, e.lipschitz, record=True), e)
    for info in trace.rounds:
        ending = {iv for iv in info.intervals if iv.end == info.t}
        assert set(info.removed) == ending
        assert not ending & set(info.updated)
        assert set(info.updated) | ending == set(info.intervals)


def test_aoa_active_count_and_weights():
    T = 300
    e = env("adversarial-linear", T, seed=8, dimension=3)
    trace = run_game(AOA(e.domain, e.lipschitz, record=True), e)
    for t, (n, info) in enumerate(zip(trace.n_active, trace.rounds), start=1):
        assert n == len(info.intervals) <= math.floor(math.log2(t)) + 1
        assert math.fsum(info.weights) == pytest.approx(1.0, abs=1e-12)


def test_aoa_horizon_free():
    e = env("drift", 50)
    aoa = AOA(e.domain, e.lipschitz)
    run_game(aoa, e)
    run_game(aoa, e)
    assert aoa.t == 100
