import random

import pytest

from teammon.detection import (DetectionClass, NotApplicableError, Outcome, Policy,
                               UnsupportedConfigurationError, build_layers, classify,
                               detect_centralized, detect_distributed, detect_mutex,
                               detect_role_similarity, detect_teamwork, team_plan_sets)
from teammon.hypothesis import CandidateSets, Extreme, TieBreak
from teammon.plan_model import TeamDefinition, load_library
from teammon.recognition import Observation, prune_plans, resl_run
from teammon.scenario_sim import bundled

ROOT = "execute-mission"
F, W, H, J = "fly-flight-plan", "wait-at-point", "ordered-halt", "join-scout"


def layers(own, sets):
    agent, plan = own
    everyone = {a: {ROOT} for a in sets}
    return [CandidateSets.build(everyone, (agent, ROOT)), CandidateSets.build(sets, own)]


def test_policy_mapping():
    assert Policy.OPTIMISTIC.teamwork_extreme() is Extreme.MAX_COHERENT
    assert Policy.PESSIMISTIC.teamwork_extreme() is Extreme.MAX_INCOHERENT
    assert Policy.OPTIMISTIC.mutex_extreme() is Extreme.MAX_INCOHERENT


def test_optimistic_misses_ambiguous_difference(modsaf):
    # A1 flies on; A2 landed at the way-point while A3 flies. Maximal coherence hides it.
    ls = layers(("A1", F), {"A2": {F}, "A3": {F, W}})
    assert detect_teamwork(modsaf, ls, Policy.OPTIMISTIC).outcome is Outcome.NO_FAILURE
    v = detect_teamwork(modsaf, ls, Policy.PESSIMISTIC)
    assert v.outcome is Outcome.FAILURE and v.difference_depth == 2


def test_verdict_invariants(modsaf):
    ls = layers(("A1", F), {"A2": {W, H}})
    v = detect_teamwork(modsaf, ls, Policy.OPTIMISTIC)
    assert v.detected and v.differing_assignment.assignment["A1"] == F
    none = detect_teamwork(modsaf, layers(("A1", F), {"A2": {F}}), Policy.OPTIMISTIC)
    assert none.difference_depth is None and none.reported_hypothesis.assignment == {"A1": F, "A2": F}


def test_centralized_brackets(modsaf):
    ls = layers(("A1", F), {"A2": {F}, "A3": {F, W}})
    v = detect_centralized(modsaf, ls)
    assert v.outcome is Outcome.POSSIBLE_FAILURE
    assert not v.optimistic.detected and v.pessimistic.detected
    sure = detect_centralized(modsaf, layers(("A1", F), {"A2": {W, H}, "A3": {F, W}}))
    assert sure.outcome is Outcome.FAILURE
    with pytest.raises(ValueError):
        classify(v, True)


def test_mixed_depth_is_failure():
    from teammon.plan_model import library_from_dict
    lib = library_from_dict({"root": "m", "roles": ["r"], "nodes": [
        {"id": "m", "children": ["x", "y"]},
        {"id": "x", "children": ["x-team"]}, {"id": "x-team", "signatures": {"r": ["a"]}},
        {"id": "y", "children": ["y-solo"]},
        {"id": "y-solo", "kind": "individual", "signatures": {"r": ["a"]}}]})
    # a team plan meets an individual plan at depth 3 under unequal parents
    ls = [CandidateSets.build({"b": {"m"}}, ("a", "m")),
          CandidateSets.build({"b": {"x"}}, ("a", "x")),
          CandidateSets.build({"b": {"y-solo"}}, ("a", "x-team"))]
    v = detect_teamwork(lib, ls, Policy.OPTIMISTIC)
    assert v.outcome is Outcome.FAILURE and v.difference_depth == 3
    # one hierarchy ends while the other still holds a team plan
    short = [ls[0], ls[1], CandidateSets.build({}, ("a", "x-team"))]
    assert detect_teamwork(lib, short, Policy.OPTIMISTIC).difference_depth == 3


def test_simple_team_required():
    robo = load_library(bundled("robocup"))
    team = TeamDefinition(tuple((r, r) for r in sorted(robo.roles)))
    ls = [CandidateSets.build({"attacker": {"play"}}, ("goalie", "play"))]
    with pytest.raises(UnsupportedConfigurationError):
        detect_teamwork(robo, ls, Policy.OPTIMISTIC, team=team)


def test_mutex_inversion():
    cands = CandidateSets.build({"P2": {"unmask", "shoot"}}, ("P1", "shoot"))
    assert not detect_mutex(cands, Policy.OPTIMISTIC).detected
    assert detect_mutex(cands, Policy.PESSIMISTIC).detected
    assert detect_mutex(CandidateSets.build({"P2": {"shoot"}}, ("P1", "shoot")),
                        Policy.OPTIMISTIC).detected


def test_role_similarity():
    lib = load_library(bundled("engage"))
    team = TeamDefinition((("P1", "pilot"), ("P2", "pilot")))
    same = lambda a, b: a == b
    assert not detect_role_similarity(lib, team, "P1", "P2", {"shoot"}, {"shoot", "unmask"},
                                      same).detected
    assert detect_role_similarity(lib, team, "P1", "P2", {"mask"}, {"shoot"}, same).detected
    with pytest.raises(NotApplicableError):
        detect_role_similarity(lib, team, "P1", "P2", {"engage"}, {"shoot"}, same)


def test_classify(modsaf):
    yes = detect_teamwork(modsaf, layers(("A1", F), {"A2": {W}}), Policy.OPTIMISTIC)
    no = detect_teamwork(modsaf, layers(("A1", F), {"A2": {F}}), Policy.OPTIMISTIC)
    assert classify(yes, True) is DetectionClass.TRUE_POSITIVE
    assert classify(yes, False) is DetectionClass.FALSE_POSITIVE
    assert classify(no, True) is DetectionClass.FALSE_NEGATIVE
    assert classify(no, False) is DetectionClass.TRUE_NEGATIVE
    assert DetectionClass.FALSE_NEGATIVE.is_false and not DetectionClass.TRUE_POSITIVE.is_false


def test_build_layers_from_models(modsaf):
    models = {"A2": resl_run(modsaf, "attacker", [Observation("A2", 0, frozenset({"landed"}))]),
              "A3": resl_run(modsaf, "scout", [Observation("A3", 0, frozenset({"flying", "low-level"}))])}
    ls = build_layers(models, self_agent="A1", self_path=modsaf.path_to("fly-route"),
                      path_filter=prune_plans([J]))
    assert ls[1].sets == {"A1": {F}, "A2": {W, H}, "A3": {F, W}}
    assert ls[2].sets["A2"] == {"just-wait", "halt-in-place"}


def test_distributed_flags_risky(data_dir):
    lib = load_library(data_dir / "degenerate.json")
    team = TeamDefinition((("l", "lead"), ("w", "wing")))
    per = {"l": [CandidateSets.build({"w": {"mission"}}, ("l", "mission")),
                 CandidateSets.build({"w": {"advance", "hold", "retreat"}}, ("l", "advance"))]}
    dv = detect_distributed(lib, team, per)
    assert dv.guarantee_void and len(dv.risky_pairs) == 3
    assert team_plan_sets(lib) == {2: {"advance", "hold", "retreat"}}


def test_seeded_rng_reproducible(modsaf):
    ls = layers(("A3", J), {"A1": {W, H}, "A2": {W, H}})
    picks = {detect_teamwork(modsaf, ls, Policy.OPTIMISTIC, tie_break=TieBreak.SEEDED_RANDOM,
                             rng=random.Random(s)).reported_hypothesis.assignment["A1"]
             for s in range(20)}
    assert picks == {W, H}
