import json

import pytest

from teammon.detection import Outcome
from teammon.scenario_sim import (Scenario, ScenarioError, bundled, case_trace, emit_observations,
                                  format_csv, format_text, generate_cases, ground_truth_failure,
                                  load_scenario, parse_csv, run_permutations, truly_started)
from teammon.trace_analytics import detect_switches


@pytest.fixture(scope="module")
def ex1():
    return load_scenario("example1")


@pytest.fixture(scope="module")
def ex2():
    return load_scenario("example2")


def test_bundled_scenarios(ex1, ex2):
    assert isinstance(ex1, Scenario)
    assert [c.id for c in ex1.cases] == list(range(1, 9))
    assert [c.id for c in ex2.cases] == list(range(1, 6))
    assert ex2.tie_break_seed is not None and ex1.tie_break_seed is None
    assert load_scenario(bundled("example1")).cases == ex1.cases


def test_observations(ex1):
    obs = {o.agent: o.signature for o in emit_observations(ex1, 2, 1)}
    assert obs["A1"] == {"flying", "in-formation"}
    assert obs["A2"] == {"landed"}
    assert {o.agent: o.signature for o in emit_observations(ex1, 1, 1)}["A1"] == {"landed"}
    assert emit_observations(ex1, 2, 1) == emit_observations(ex1, 2, 1)
    # the prelude is shared: everyone flies at tick 0
    assert {o.signature for o in emit_observations(ex1, 1, 0) if o.agent != "A3"} == \
        {frozenset({"flying", "in-formation"})}


def test_ground_truth(ex1, ex2):
    assert [ground_truth_failure(ex1, i) for i in range(1, 9)] == \
        [False, True, True, True, True, True, True, False]
    assert [ground_truth_failure(ex2, i) for i in range(1, 6)] == [False, True, True, True, False]


def test_truly_started(ex2):
    case = ex2.case(2)
    assert truly_started(ex2, case, "A1") == set()
    assert truly_started(ex2, case, "A3") == {"join-scout", "hover-for-attackers"}


def test_reachability_closure(ex1, ex2):
    reach2 = generate_cases(ex2)
    assert len(reach2) == 5
    assert {tuple(sorted(p.items())) for p in reach2} == \
        {tuple(sorted(c.paths.items())) for c in ex2.cases}
    assert len(generate_cases(ex1)) == 8


def test_bad_scenarios(tmp_path, data_dir):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioError, match="parse error"):
        load_scenario(bad)
    data = json.loads(bundled("example1").read_text())
    data["library"] = "modsaf.json"
    data["cases"][0]["paths"]["A1"] = "no-such-plan"
    with pytest.raises(ScenarioError, match="unknown plan"):
        load_scenario(data)
    data["cases"][0]["paths"]["A1"] = ["execute-mission", "just-wait"]
    with pytest.raises(ScenarioError, match="root-to-leaf"):
        load_scenario(data)
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "missing.json")


def test_runs_are_consistent(ex1):
    for mode in ("optimistic", "pessimistic", "centralized", "distributed"):
        for run in run_permutations(ex1, "all", mode):
            if run.verdict.outcome is not Outcome.POSSIBLE_FAILURE:
                assert run.detection_class is not None


def test_deterministic_output(ex1, ex2):
    a = format_csv(run_permutations(ex1, "A1", "centralized"), ex1.team.agents)
    b = format_csv(run_permutations(ex1, "A1", "centralized"), ex1.team.agents)
    assert a == b
    s1 = format_text(run_permutations(ex2, "A3", "optimistic", 7), ex2.team.agents)
    s2 = format_text(run_permutations(ex2, "A3", "optimistic", 7), ex2.team.agents)
    assert s1 == s2


def test_csv_round_trip(ex1):
    runs = run_permutations(ex1, "A3", "optimistic")
    rows = parse_csv(format_csv(runs, ex1.team.agents))
    assert [int(r["case"]) for r in rows] == [r.case for r in runs]
    assert [r["verdict"] for r in rows] == [r.verdict.outcome.name for r in runs]


def test_default_tie_break_classes_invariant(ex2):
    # without the pinned seed, plan-id order decides the landed attackers' plan
    det = run_permutations(ex2, "A3", "optimistic")
    seeded = run_permutations(ex2, "A3", "optimistic", ex2.tie_break_seed)
    assert [r.detection_class for r in det] == [r.detection_class for r in seeded]
    assert det[1].hypothesized["A1"] == "H"


def test_unknown_monitor(ex1):
    with pytest.raises(KeyError):
        run_permutations(ex1, "A9")
    with pytest.raises(ValueError):
        run_permutations(ex1, "A1", "psychic")


def test_case_trace(ex1):
    trace = case_trace(ex1, 2)
    assert trace.run_length == 2
    assert trace.records[1] == {"A1": "fly-flight-plan", "A2": "wait-at-point",
                                "A3": "wait-at-point"}
    assert [s.length for s in detect_switches(trace)] == [1]
