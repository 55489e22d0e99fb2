"""Phase-scripted scenario harness: ground truth in, result tables out.

A scenario fixes a library, a team, a prelude of phases every case shares,
and a list of cases giving each agent's final plan path.  Phase i is
observed at tick i.  Ground truth comes only from the scripted paths.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Mapping, Sequence

from .detection import (DetectionClass, DetectionVerdict, Outcome, Policy, TieBreak, build_layers,
                        classify, detect_centralized, detect_distributed, detect_teamwork,
                        team_plan_sets)
from .diagnosis import Diagnosis, diagnose_failure
from .plan_model import PlanLibrary, TeamDefinition, load_library
from .recognition import AgentModel, Observation, PathFilter, prune_plans, resl_run
from .trace_analytics import Trace

MODES = ("optimistic", "pessimistic", "centralized", "distributed")
ALL = "all"


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Case:
    id: int
    paths: Mapping[str, tuple[str, ...]]
    note: str = ""
    faults: tuple[str, ...] = ()


@dataclass(frozen=True)
class Scenario:
    name: str
    library: PlanLibrary
    team: TeamDefinition
    cases: tuple[Case, ...]
    prelude: tuple[Mapping[str, tuple[str, ...]], ...] = ()
    prune: tuple[str, ...] = ()
    title: str = ""
    options: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    leaders: Mapping[str, str] = field(default_factory=dict)
    tie_break_seed: int | None = None

    @property
    def path_filter(self) -> PathFilter | None:
        return prune_plans(self.prune) if self.prune else None

    @property
    def team_depth(self) -> int:
        """Deepest depth holding a team plan on some scripted path."""
        return max(d for c in self.cases for p in c.paths.values()
                   for d, plan in enumerate(p, 1) if self.library.node(plan).is_team)

    def case(self, case_id: int) -> Case:
        for c in self.cases:
            if c.id == case_id:
                return c
        raise KeyError(f"no case {case_id} in {self.name!r}")

    def phases(self, case: Case) -> list[Mapping[str, tuple[str, ...]]]:
        return [*self.prelude, case.paths]


# -- loading -------------------------------------------------------------------

def bundled(name: str) -> Path:
    """Path of a bundled data file, with or without the .json suffix."""
    if not name.endswith(".json"):
        name += ".json"
    return Path(str(resources.files("teammon") / "data" / name))


def _resolve(source) -> tuple[dict, Path | None]:
    if isinstance(source, Mapping):
        return dict(source), None
    path = Path(source)
    if not path.exists() and not path.suffix and bundled(str(source)).exists():
        path = bundled(str(source))
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read scenario {source}: {exc}") from exc
    try:
        return json.loads(text), path
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc


def _expand(lib: PlanLibrary, where: str, value) -> tuple[str, ...]:
    if isinstance(value, str):
        if value not in lib:
            raise ScenarioError(f"{where}: unknown plan {value!r}")
        path = lib.path_to(value)
    else:
        path = tuple(value)
    if not lib.is_path(path):
        raise ScenarioError(f"{where}: {list(path)} is not a root-to-leaf path")
    return path


def _phase(lib, team, where, raw) -> dict[str, tuple[str, ...]]:
    if set(raw) != set(team.agents):
        raise ScenarioError(f"{where}: phase must give a path for each of {list(team.agents)}")
    return {a: _expand(lib, f"{where}.{a}", raw[a]) for a in team.agents}


def load_scenario(source) -> Scenario:
    """Load a scenario from a file path, a bundled name (e.g. 'example1') or a dict."""
    data, path = _resolve(source)
    try:
        lib_src = data["library"]
        if isinstance(lib_src, str):
            base = path.parent if path is not None else Path.cwd()
            lib_path = base / lib_src
            lib = load_library(lib_path if lib_path.exists() else bundled(lib_src))
        else:
            lib = load_library(lib_src)
        team = TeamDefinition.from_json(data["team"])
        prelude = tuple(_phase(lib, team, f"prelude[{i}]", ph)
                        for i, ph in enumerate(data.get("prelude", [])))
        cases = []
        for i, raw in enumerate(data["cases"]):
            cases.append(Case(int(raw.get("id", i + 1)),
                              _phase(lib, team, f"cases[{i}].paths", raw["paths"]),
                              str(raw.get("note", "")), tuple(raw.get("faults", ()))))
    except KeyError as exc:
        raise ScenarioError(f"scenario lacks required key {exc}") from None
    ids = [c.id for c in cases]
    if len(set(ids)) != len(ids):
        raise ScenarioError("duplicate case ids")
    for plan in data.get("prune", []):
        if plan not in lib:
            raise ScenarioError(f"prune: unknown plan {plan!r}")
    options = {a: tuple(v) for a, v in data.get("options", {}).items()}
    for agent, leaves in options.items():
        for leaf in leaves:
            _expand(lib, f"options.{agent}", leaf)
    seed = data.get("tie_break_seed")
    return Scenario(str(data.get("name", path.stem if path else "")), lib, team, tuple(cases),
                    prelude, tuple(data.get("prune", [])), str(data.get("title", "")),
                    options, dict(data.get("leaders", {})),
                    None if seed is None else int(seed))


# -- ground truth ----------------------------------------------------------------

def _leaf_signature(lib: PlanLibrary, path: Sequence[str], role: str) -> frozenset[str]:
    for plan in reversed(path):
        sig = lib.signature(plan, role)
        if sig is not None:
            return sig
    raise ScenarioError(f"no signature for role {role!r} on {list(path)}")


def emit_observations(scenario: Scenario, case: Case | int, tick: int) -> list[Observation]:
    """What each agent looks like at `tick`; ticks past the script hold the last phase."""
    if isinstance(case, int):
        case = scenario.case(case)
    phases = scenario.phases(case)
    phase = phases[min(tick, len(phases) - 1)]
    lib, team = scenario.library, scenario.team
    return [Observation(a, tick, _leaf_signature(lib, phase[a], team.role_of(a)))
            for a in team.agents]


def ground_truth_failure(scenario: Scenario, case: Case | int) -> bool:
    """True iff agents' paths differ at some depth where a team plan is held."""
    if isinstance(case, int):
        case = scenario.case(case)
    lib = scenario.library
    paths = list(case.paths.values())
    for d in range(1, max(len(p) for p in paths) + 1):
        at = [p[d - 1] if d <= len(p) else None for p in paths]
        if any(x is not None and lib.node(x).is_team for x in at) and len(set(at)) > 1:
            return True
    return False


def truly_started(scenario: Scenario, case: Case, agent: str) -> set[str]:
    """Plans on the agent's final path that it was not executing in the phase before."""
    phases = scenario.phases(case)
    final = phases[-1][agent]
    if len(phases) == 1:
        return set(final)
    before = phases[-2][agent]
    return {p for i, p in enumerate(final) if final[:i + 1] != before[:i + 1]}


def ground_truth_diagnosis(scenario: Scenario, case: Case) -> Diagnosis:
    chosen = {a: (case.paths[a], truly_started(scenario, case, a)) for a in scenario.team.agents}
    return diagnose_failure(scenario.library, chosen)


def generate_cases(scenario: Scenario) -> list[dict[str, tuple[str, ...]]]:
    """Every reachable combination of the per-agent options.

    A plan with a leader can only be executed while its leader executes it.
    """
    lib, team = scenario.library, scenario.team
    agents = team.agents
    if set(scenario.options) != set(agents):
        raise ScenarioError("options must list alternatives for every agent")
    out = []
    for combo in product(*(scenario.options[a] for a in agents)):
        paths = {a: lib.path_to(leaf) for a, leaf in zip(agents, combo)}
        if all(leader in paths and plan in paths[leader]
               for plan, leader in scenario.leaders.items()
               for p in paths.values() if plan in p):
            out.append(paths)
    return out


def case_trace(scenario: Scenario, case: Case | int) -> Trace:
    """Deepest team plan per agent at each scripted tick."""
    if isinstance(case, int):
        case = scenario.case(case)
    lib = scenario.library
    records = []
    for phase in scenario.phases(case):
        records.append({a: [p for p in path if lib.node(p).is_team][-1]
                        for a, path in phase.items()})
    return Trace(scenario.team.agents, tuple(records), scenario.team)


# -- running -------------------------------------------------------------------------

@dataclass(frozen=True)
class PermutationRun:
    case: int
    actual: Mapping[str, str]
    monitor: str
    policy: str
    verdict: DetectionVerdict
    ground_truth: bool
    detection_class: DetectionClass | None
    hypothesized: Mapping[str, str] = field(default_factory=dict)
    diagnosis: Diagnosis | None = None
    diagnosis_success: bool | None = None
    note: str = ""

    def __post_init__(self):
        if self.verdict.outcome is Outcome.POSSIBLE_FAILURE:
            ok = self.detection_class is None
        else:
            ok = self.detection_class is classify(self.verdict, self.ground_truth)
        if not ok:
            raise ValueError("detection class disagrees with the verdict")


def recognize(scenario: Scenario, case: Case) -> dict[str, AgentModel]:
    phases = scenario.phases(case)
    obs = [emit_observations(scenario, case, t) for t in range(len(phases))]
    return {a: resl_run(scenario.library, scenario.team.role_of(a),
                        [o for tick in obs for o in tick if o.agent == a], a)
            for a in scenario.team.agents}


def _case_rng(seed: int | None, case: Case, monitor: str, mode: str) -> random.Random | None:
    if seed is None:
        return None
    return random.Random(f"{seed}/{case.id}/{monitor}/{mode}")


def _label(lib: PlanLibrary, plan: str) -> str:
    return lib.node(plan).display


def _diagnose(scenario: Scenario, case: Case, monitor: str, models: Mapping[str, AgentModel],
              verdict: DetectionVerdict) -> tuple[Diagnosis, bool]:
    lib = scenario.library
    depth = verdict.difference_depth
    hyp = verdict.differing_assignment.assignment
    trail = verdict.trail
    chosen = {monitor: (case.paths[monitor], truly_started(scenario, case, monitor))}
    for agent, plan in hyp.items():
        if agent == monitor:
            continue
        model = models[agent]
        candidates = sorted(
            p for p in lib.leaf_paths
            if len(p) >= depth and p[depth - 1] == plan
            and all(p[i] == trail[i].assignment.get(agent, p[i]) for i in range(depth))
            and all(x in model.matching for x in p)
            and (scenario.path_filter is None or scenario.path_filter(p)))
        path = candidates[0] if candidates else lib.path_to(plan)
        chosen[agent] = (path, {p for p in path if model.just_started(p)})
    got = diagnose_failure(lib, chosen)
    truth = ground_truth_diagnosis(scenario, case)
    return got, bool(got.contradictions) and got.contradictions == truth.contradictions


def _run(scenario, case, monitor, mode, verdict, models, truth) -> PermutationRun:
    lib = scenario.library
    depth = scenario.team_depth
    if verdict.outcome is Outcome.POSSIBLE_FAILURE:
        cls = None
    else:
        cls = classify(verdict, truth)
    hyp = verdict.reported_hypothesis
    hypothesized = {}
    if hyp is not None:
        hypothesized = {a: _label(lib, p) for a, p in hyp.assignment.items() if a != monitor}
    diag = success = None
    if verdict.detected and verdict.differing_assignment is not None and monitor in case.paths:
        diag, success = _diagnose(scenario, case, monitor, models, verdict)
    actual = {a: _label(lib, p[depth - 1] if len(p) >= depth else p[-1])
              for a, p in case.paths.items()}
    return PermutationRun(case.id, actual, monitor, mode, verdict, truth, cls, hypothesized,
                          diag, success, case.note)


def run_permutations(scenario: Scenario, monitor: str = ALL, mode: str = "optimistic",
                     seed: int | None = None) -> list[PermutationRun]:
    """Run every case from observation to classified verdict, diagnosing detected failures.

    `monitor` is an agent id or 'all'.  `mode` is one of optimistic,
    pessimistic, centralized or distributed.  With a seed, ties are broken by
    a seeded shuffle per (case, monitor, mode); otherwise by plan-id order.
    The distributed mode adds a 'team' row per case holding the combined
    verdict.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    team = scenario.team
    if monitor != ALL and monitor not in team.agents:
        raise KeyError(f"unknown monitor {monitor!r}")
    monitors = list(team.agents) if monitor == ALL else [monitor]
    tie = TieBreak.DETERMINISTIC if seed is None else TieBreak.SEEDED_RANDOM
    lib, pf = scenario.library, scenario.path_filter
    runs = []
    for case in scenario.cases:
        models = recognize(scenario, case)
        truth = ground_truth_failure(scenario, case)
        layers = {m: build_layers({a: md for a, md in models.items() if a != m},
                                  self_agent=m, self_path=case.paths[m], path_filter=pf)
                  for m in monitors}
        if mode == "distributed":
            rng = _case_rng(seed, case, "team", mode)
            dv = detect_distributed(lib, team, layers, plan_sets=team_plan_sets(lib, pf),
                                    tie_break=tie, rng=rng)
            for m in monitors:
                runs.append(_run(scenario, case, m, mode, dv.per_monitor[m], models, truth))
            runs.append(_run(scenario, case, "team", mode, dv.team, models, truth))
            continue
        for m in monitors:
            rng = _case_rng(seed, case, m, mode)
            if mode == "centralized":
                v = detect_centralized(lib, layers[m], team=team, tie_break=tie, rng=rng)
            else:
                v = detect_teamwork(lib, layers[m], Policy(mode), team=team,
                                    tie_break=tie, rng=rng)
            runs.append(_run(scenario, case, m, mode, v, models, truth))
    return runs


# -- formatting ----------------------------------------------------------------------

CLASS_SHORT = {DetectionClass.TRUE_POSITIVE: "TP", DetectionClass.TRUE_NEGATIVE: "TN",
               DetectionClass.FALSE_POSITIVE: "FP", DetectionClass.FALSE_NEGATIVE: "FN"}


def table_rows(runs: Sequence[PermutationRun], agents: Sequence[str]) -> tuple[list[str], list[list[str]]]:
    header = (["case", "monitor", "policy"] + [f"actual_{a}" for a in agents]
              + [f"hyp_{a}" for a in agents]
              + ["failure", "verdict", "detected", "diagnosis", "class", "contradictions"])
    rows = []
    for r in runs:
        diag = "n/a" if r.diagnosis_success is None else ("+" if r.diagnosis_success else "-")
        contra = " ".join(sorted(r.diagnosis.contradictions)) if r.diagnosis else ""
        rows.append([str(r.case), r.monitor, r.policy]
                    + [r.actual.get(a, "") for a in agents]
                    + [r.hypothesized.get(a, "") for a in agents]
                    + ["+" if r.ground_truth else "-", r.verdict.outcome.name,
                       "+" if r.verdict.detected else "-", diag,
                       CLASS_SHORT.get(r.detection_class, "verify"), contra])
    return header, rows


def format_csv(runs: Sequence[PermutationRun], agents: Sequence[str]) -> str:
    header, rows = table_rows(runs, agents)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def format_text(runs: Sequence[PermutationRun], agents: Sequence[str]) -> str:
    header, rows = table_rows(runs, agents)
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
             for row in [header, *rows]]
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))
