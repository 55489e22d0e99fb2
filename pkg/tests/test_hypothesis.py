import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from teammon.hypothesis import (CandidateSets, Extreme, HypothesisSpaceTooLarge,
                                ModelingIncompleteError, TeamHypothesis, TieBreak, coherence,
                                enumerate_hypotheses, max_distinct, min_distinct, select_extreme)

PLANS = ["F", "W", "H", "J", "E"]

candidate_sets = st.dictionaries(
    st.sampled_from(["a1", "a2", "a3", "a4", "a5"]),
    st.frozensets(st.sampled_from(PLANS), min_size=1),
    min_size=1, max_size=5).map(CandidateSets)


def test_coherence_arithmetic():
    assert coherence({"a": "W", "b": "W", "c": "H"}) == Fraction(3, 2)
    assert coherence({"a": "W", "b": "W", "c": "W"}) == 3
    assert coherence({"a": "F", "b": "W", "c": "H"}) == 1
    with pytest.raises(ValueError):
        coherence({})


def test_table_six_extremes():
    # A1 watching from fly-flight-plan in the undetected way-point case
    cands = CandidateSets.build({"A2": {"W", "H"}, "A3": {"F", "W"}}, ("A1", "F"))
    assert select_extreme(cands, Extreme.MAX_COHERENT).coherence == Fraction(3, 2)
    assert select_extreme(cands, Extreme.MAX_INCOHERENT).coherence == 1
    assert cands.size() == 4


def test_greedy_trap():
    # taking the most popular plan first would need three plans here
    cands = CandidateSets({"a1": {"A"}, "a2": {"A", "C"}, "a3": {"B", "C"}, "a4": {"B"}})
    hyp = select_extreme(cands, Extreme.MAX_COHERENT)
    assert len(hyp.plans) == 2 and hyp.assignment == {"a1": "A", "a2": "A", "a3": "B", "a4": "B"}


def test_incomplete_and_bounds():
    with pytest.raises(ModelingIncompleteError):
        select_extreme(CandidateSets({"a": set(), "b": {"F"}}), Extreme.MAX_COHERENT)
    big = CandidateSets({f"a{i}": set(PLANS) for i in range(9)})
    with pytest.raises(HypothesisSpaceTooLarge):
        list(enumerate_hypotheses(big, bound=1000))
    with pytest.raises(ValueError):
        CandidateSets({"a": {"F", "W"}}, self_agent="a")
    with pytest.raises(ValueError):
        select_extreme(big, Extreme.MAX_COHERENT, TieBreak.SEEDED_RANDOM)


def test_restrict_keeps_monitor():
    cands = CandidateSets.build({"A2": {"W"}, "A3": {"F"}}, ("A1", "F"))
    assert cands.restrict({"A3"}).agents == ("A1", "A3")


@settings(max_examples=300)
@given(candidate_sets)
def test_extremes_match_brute_force(cands):
    every = list(enumerate_hypotheses(cands))
    best = max(h.coherence for h in every)
    worst = min(h.coherence for h in every)
    hi = select_extreme(cands, Extreme.MAX_COHERENT)
    lo = select_extreme(cands, Extreme.MAX_INCOHERENT)
    assert hi.coherence == best and lo.coherence == worst
    assert len(hi.plans) == min_distinct(cands)
    assert len(lo.plans) == max_distinct(cands)
    for h in (hi, lo):
        assert all(h.assignment[a] in cands.sets[a] for a in cands.agents)


@given(candidate_sets, st.integers(0, 2 ** 32))
def test_seeded_ties_stay_extreme(cands, seed):
    det = select_extreme(cands, Extreme.MAX_COHERENT)
    rnd = select_extreme(cands, Extreme.MAX_COHERENT, TieBreak.SEEDED_RANDOM, random.Random(seed))
    again = select_extreme(cands, Extreme.MAX_COHERENT, TieBreak.SEEDED_RANDOM, random.Random(seed))
    assert rnd.coherence == det.coherence
    assert rnd == again


@given(candidate_sets)
def test_enumeration_is_the_product(cands):
    every = list(enumerate_hypotheses(cands))
    assert len(every) == cands.size() == len(set(every))


def test_hypothesis_equality():
    assert TeamHypothesis({"b": "W", "a": "F"}).key == (("a", "F"), ("b", "W"))
    assert hash(TeamHypothesis({"a": "F"})) == hash(TeamHypothesis({"a": "F"}))
