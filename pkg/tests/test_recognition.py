import pytest
from hypothesis import given, strategies as st

from teammon.recognition import (Observation, OrderingError, Truth, matching_paths,
                                 plans_at_depth, prune_plans, resl_init, resl_run, resl_update)

LANDED = frozenset({"landed"})
FORMATION = frozenset({"flying", "in-formation"})
LOW = frozenset({"flying", "low-level"})


def test_landed_attacker_is_ambiguous(modsaf):
    model = resl_run(modsaf, "attacker", [Observation("A1", 0, LANDED)])
    paths = {h.path[-1] for h in matching_paths(model)}
    assert paths == {"just-wait", "halt-in-place"}
    assert plans_at_depth(model, 2) == {"wait-at-point", "ordered-halt"}
    assert plans_at_depth(model, 1) == {"execute-mission"}


def test_flying_scout(modsaf):
    model = resl_run(modsaf, "scout", [Observation("A3", 0, LOW)])
    assert plans_at_depth(model, 2) == {"fly-flight-plan", "wait-at-point"}
    pruned = plans_at_depth(model, 2, prune_plans(["wait-at-point"]))
    assert pruned == {"fly-flight-plan"}


def test_selection_ticks_and_conditions(modsaf):
    model = resl_init(modsaf, "attacker", "A1")
    model = resl_update(model, Observation("A1", 0, FORMATION))
    assert model.just_started("fly-flight-plan")
    model = resl_update(model, Observation("A1", 1, FORMATION))
    assert not model.just_started("fly-flight-plan")
    assert model.selection_tick["fly-flight-plan"] == 0
    assert model.conditions["fly-flight-plan"] == (Truth.UNKNOWN, Truth.FALSE)
    model = resl_update(model, Observation("A1", 2, LANDED))
    assert model.just_started("wait-at-point")
    assert model.conditions["wait-at-point"] == (Truth.TRUE, Truth.FALSE)
    assert model.conditions["fly-flight-plan"] == (Truth.UNKNOWN, Truth.UNKNOWN)
    # the root never stopped matching
    assert model.selection_tick["execute-mission"] == 0


def test_no_match_leaves_no_paths(modsaf):
    model = resl_run(modsaf, "attacker", [Observation("A1", 0, frozenset({"swimming"}))])
    assert matching_paths(model) == set()


def test_ordering(modsaf):
    model = resl_run(modsaf, "attacker", [Observation("A1", 3, LANDED)])
    with pytest.raises(OrderingError):
        resl_update(model, Observation("A1", 3, LANDED))
    with pytest.raises(ValueError):
        resl_update(model, Observation("A2", 4, LANDED))
    with pytest.raises(ValueError):
        Observation("A1", -1, LANDED)


@given(st.lists(st.sampled_from([LANDED, FORMATION, LOW]), min_size=1, max_size=8),
       st.sampled_from(["attacker", "scout"]))
def test_memoryless(modsaf, seq, role):
    """Only the last observation decides what matches."""
    model = resl_run(modsaf, role, [Observation("X", t, s) for t, s in enumerate(seq)])
    fresh = resl_run(modsaf, role, [Observation("X", 0, seq[-1])])
    assert model.matching == fresh.matching
    for h in matching_paths(model):
        assert all(p in model.matching for p in h.path)
