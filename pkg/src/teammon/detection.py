"""Relationship-failure detection over per-depth candidate sets."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

from .hypothesis import (CandidateSets, Extreme, ModelingIncompleteError, TeamHypothesis,
                         TieBreak, select_extreme)
from .plan_model import (ConfigurationError, PlanLibrary, TeamDefinition, INDIVIDUAL,
                         is_observably_partitioned, is_simple_team, risky_points)
from .recognition import AgentModel, PathFilter, plans_at_depth

Layers = Sequence[CandidateSets]  # index 0 is depth 1


class UnsupportedConfigurationError(ConfigurationError):
    pass


class NotApplicableError(ValueError):
    pass


class Policy(Enum):
    OPTIMISTIC = "optimistic"
    PESSIMISTIC = "pessimistic"

    def teamwork_extreme(self) -> Extreme:
        return Extreme.MAX_COHERENT if self is Policy.OPTIMISTIC else Extreme.MAX_INCOHERENT

    def mutex_extreme(self) -> Extreme:
        # equalities are failures, so soundness now comes from incoherence
        return Extreme.MAX_INCOHERENT if self is Policy.OPTIMISTIC else Extreme.MAX_COHERENT


class Outcome(Enum):
    NO_FAILURE = 0
    POSSIBLE_FAILURE = 1
    FAILURE = 2


class DetectionClass(Enum):
    TRUE_POSITIVE = "True Positive"
    TRUE_NEGATIVE = "True Negative"
    FALSE_POSITIVE = "False Positive"
    FALSE_NEGATIVE = "False Negative"

    @property
    def is_false(self) -> bool:
        return self in (DetectionClass.FALSE_POSITIVE, DetectionClass.FALSE_NEGATIVE)


@dataclass(frozen=True)
class DetectionVerdict:
    outcome: Outcome
    difference_depth: int | None = None
    differing_assignment: TeamHypothesis | None = None
    # hypotheses selected at each compared depth, top-down
    trail: tuple[TeamHypothesis, ...] = ()
    # POSSIBLE_FAILURE keeps both extremes for a later verification step
    optimistic: DetectionVerdict | None = None
    pessimistic: DetectionVerdict | None = None
    report_depth: int | None = None

    def __post_init__(self):
        if (self.difference_depth is None) != (self.outcome is Outcome.NO_FAILURE):
            raise ValueError("difference depth is present iff a failure is reported")

    @property
    def detected(self) -> bool:
        return self.outcome is Outcome.FAILURE

    @property
    def reported_hypothesis(self) -> TeamHypothesis | None:
        """Hypothesis at the difference depth, else at the deepest team depth compared."""
        if self.differing_assignment is not None:
            return self.differing_assignment
        if self.report_depth is not None and self.report_depth <= len(self.trail):
            return self.trail[self.report_depth - 1]
        return self.trail[-1] if self.trail else None


def _rng_for(rng: random.Random | None, tie_break: TieBreak, depth: int):
    if tie_break is TieBreak.DETERMINISTIC or rng is None:
        return None
    # one independent stream per depth keeps depths reproducible in isolation
    return random.Random(f"{rng.random()!r}/{depth}")


def _ensure_simple(lib: PlanLibrary, team: TeamDefinition | None):
    if team is not None and not is_simple_team(lib, team):
        raise UnsupportedConfigurationError("detection supports simple teams only")


def detect_teamwork(lib: PlanLibrary, layers: Layers, policy: Policy, *,
                    team: TeamDefinition | None = None,
                    tie_break: TieBreak = TieBreak.DETERMINISTIC,
                    rng: random.Random | None = None) -> DetectionVerdict:
    """Top-down comparison of team plans under one disambiguation policy.

    Walks depths from the root.  While every selected plan is a team plan,
    any inequality is a failure at that depth.  Reaching individual plans
    (or the bottom) without inequality is no failure; a mix of team and
    individual plans at one depth, or one hierarchy ending while another
    still holds a team plan, is a failure.
    """
    _ensure_simple(lib, team)
    if not layers:
        raise ModelingIncompleteError("no candidate layers")
    everyone = set(layers[0].sets)
    extreme = policy.teamwork_extreme()
    trail: list[TeamHypothesis] = []
    last_team_depth = None
    for depth, cands in enumerate(layers, start=1):
        present = {a for a, s in cands.sets.items() if s}
        if not present:
            break
        if depth == 1:
            cands.require_complete()
        hyp = select_extreme(cands.restrict(present), extreme, tie_break,
                             _rng_for(rng, tie_break, depth))
        trail.append(hyp)
        kinds = {lib.node(p).is_team for p in hyp.assignment.values()}
        exhausted = everyone - present
        if kinds == {True}:
            if len(hyp.plans) > 1:
                return DetectionVerdict(Outcome.FAILURE, depth, hyp, tuple(trail))
            if exhausted:
                return DetectionVerdict(Outcome.FAILURE, depth, hyp, tuple(trail))
            last_team_depth = depth
            continue
        if kinds == {False}:
            return DetectionVerdict(Outcome.NO_FAILURE, trail=tuple(trail),
                                    report_depth=last_team_depth)
        return DetectionVerdict(Outcome.FAILURE, depth, hyp, tuple(trail))
    return DetectionVerdict(Outcome.NO_FAILURE, trail=tuple(trail), report_depth=last_team_depth)


def detect_centralized(lib: PlanLibrary, layers: Layers, *,
                       team: TeamDefinition | None = None,
                       tie_break: TieBreak = TieBreak.DETERMINISTIC,
                       rng: random.Random | None = None) -> DetectionVerdict:
    """Run both policies; disagreement means the failure needs verification."""
    opt = detect_teamwork(lib, layers, Policy.OPTIMISTIC, team=team, tie_break=tie_break, rng=rng)
    pes = detect_teamwork(lib, layers, Policy.PESSIMISTIC, team=team, tie_break=tie_break, rng=rng)
    assert not (opt.detected and not pes.detected), \
        "a coherent failure must also be an incoherent failure"
    if opt.outcome is pes.outcome:
        return DetectionVerdict(opt.outcome, opt.difference_depth, opt.differing_assignment,
                                opt.trail, opt, pes, opt.report_depth)
    return DetectionVerdict(Outcome.POSSIBLE_FAILURE, pes.difference_depth,
                            pes.differing_assignment, pes.trail, opt, pes, pes.report_depth)


@dataclass(frozen=True)
class DistributedVerdict:
    per_monitor: Mapping[str, DetectionVerdict]
    team: DetectionVerdict
    key_agents: frozenset[str]
    guarantee_void: bool = False
    risky_pairs: frozenset[frozenset[str]] = field(default_factory=frozenset)

    @property
    def detected_by(self) -> tuple[str, ...]:
        return tuple(m for m, v in self.per_monitor.items() if v.detected)


def team_plan_sets(lib: PlanLibrary, path_filter: PathFilter | None = None) -> dict[int, set[str]]:
    """Team plans per depth that some admissible path can reach."""
    out: dict[int, set[str]] = {}
    for path in lib.leaf_paths:
        if path_filter is not None and not path_filter(path):
            continue
        for depth, plan in enumerate(path, start=1):
            if lib.node(plan).is_team:
                out.setdefault(depth, set()).add(plan)
    return {d: s for d, s in out.items() if len(s) > 1}


Observability = tuple[frozenset[str], frozenset[frozenset[str]]]


def analyze_observability(lib: PlanLibrary, team: TeamDefinition,
                          plan_sets: Mapping[int, set[str]] | None = None) -> Observability:
    """Key agent ids and risky plan pairs over the team plan sets."""
    if plan_sets is None:
        plan_sets = team_plan_sets(lib)
    keys: set[str] = set()
    risky: set[frozenset[str]] = set()
    for plans in plan_sets.values():
        _, roles = is_observably_partitioned(lib, team, plans)
        keys |= roles
        risky |= risky_points(lib, team, plans)
    return frozenset(team.agents_with_roles(keys)), frozenset(risky)


def detect_distributed(lib: PlanLibrary, team: TeamDefinition,
                       per_monitor: Mapping[str, Layers], *,
                       plan_sets: Mapping[int, set[str]] | None = None,
                       tie_break: TieBreak = TieBreak.DETERMINISTIC,
                       rng: random.Random | None = None,
                       observability: Observability | None = None) -> DistributedVerdict:
    """Every monitor watches the key agents with the optimistic policy.

    The team verdict is a failure iff some monitor reports one.  When a plan
    set lacks a key agent for some pair the verdict is still computed but the
    result is flagged as carrying no guarantee.  A precomputed
    `observability` skips the key-agent analysis.
    """
    if observability is None:
        _ensure_simple(lib, team)
        observability = analyze_observability(lib, team, plan_sets)
    key_ids, risky = observability

    verdicts = {}
    for monitor in sorted(per_monitor):
        layers = [c.restrict(key_ids) for c in per_monitor[monitor]]
        if layers and layers[0].self_agent is None:
            raise ValueError(f"monitor {monitor!r} layers lack its own plan")
        verdicts[monitor] = detect_teamwork(lib, layers, Policy.OPTIMISTIC,
                                            tie_break=tie_break, rng=rng)
    failures = [v for v in verdicts.values() if v.detected]
    if failures:
        first = min(failures, key=lambda v: v.difference_depth)
        team_verdict = DetectionVerdict(Outcome.FAILURE, first.difference_depth,
                                        first.differing_assignment, first.trail)
    else:
        any_v = next(iter(verdicts.values()), None)
        team_verdict = DetectionVerdict(Outcome.NO_FAILURE,
                                        trail=any_v.trail if any_v else (),
                                        report_depth=any_v.report_depth if any_v else None)
    return DistributedVerdict(verdicts, team_verdict, key_ids, bool(risky), risky)


def detect_mutex(cands: CandidateSets, policy: Policy, *, depth: int | None = None,
                 tie_break: TieBreak = TieBreak.DETERMINISTIC,
                 rng: random.Random | None = None) -> DetectionVerdict:
    """Mutual exclusion: any two agents sharing a plan is a failure."""
    hyp = select_extreme(cands, policy.mutex_extreme(), tie_break, rng)
    if len(hyp.plans) < len(hyp.assignment):
        return DetectionVerdict(Outcome.FAILURE, depth or 1, hyp, (hyp,))
    return DetectionVerdict(Outcome.NO_FAILURE, trail=(hyp,), report_depth=depth)


def detect_role_similarity(lib: PlanLibrary, team: TeamDefinition, agent_a: str, agent_b: str,
                           cands_a, cands_b,
                           similar: Callable[[str, str], bool]) -> DetectionVerdict:
    """Compare two same-role agents' individual plans under a similarity relation.

    The benefit of the doubt is given: no failure if any candidate pair is
    similar.
    """
    if team.role_of(agent_a) != team.role_of(agent_b):
        raise NotApplicableError(f"{agent_a!r} and {agent_b!r} have different roles")
    cands_a, cands_b = sorted(cands_a), sorted(cands_b)
    if not cands_a or not cands_b:
        raise ModelingIncompleteError("empty individual-plan candidate set")
    for p in cands_a + cands_b:
        if lib.node(p).kind != INDIVIDUAL:
            raise NotApplicableError(f"{p!r} is not an individual plan")
    for pa in cands_a:
        for pb in cands_b:
            if similar(pa, pb):
                hyp = TeamHypothesis({agent_a: pa, agent_b: pb})
                return DetectionVerdict(Outcome.NO_FAILURE, trail=(hyp,))
    hyp = TeamHypothesis({agent_a: cands_a[0], agent_b: cands_b[0]})
    return DetectionVerdict(Outcome.FAILURE, lib.depth[cands_a[0]], hyp, (hyp,))


def classify(verdict: DetectionVerdict, ground_truth_failure: bool) -> DetectionClass:
    if verdict.outcome is Outcome.POSSIBLE_FAILURE:
        raise ValueError("possible failures need verification before classification")
    if verdict.detected:
        return DetectionClass.TRUE_POSITIVE if ground_truth_failure else DetectionClass.FALSE_POSITIVE
    return DetectionClass.FALSE_NEGATIVE if ground_truth_failure else DetectionClass.TRUE_NEGATIVE


# -- building layers from recognition state ----------------------------------

def build_layers(models: Mapping[str, AgentModel], *,
                 self_agent: str | None = None, self_path: Sequence[str] | None = None,
                 path_filter: PathFilter | None = None) -> list[CandidateSets]:
    """Per-depth candidate sets for the modeled agents plus the monitor's own path."""
    depths = [len(self_path)] if self_path else []
    per_agent = {}
    for agent, model in models.items():
        if agent == self_agent:
            continue
        by_depth = {}
        d = 1
        while True:
            plans = plans_at_depth(model, d, path_filter)
            if not plans:
                break
            by_depth[d] = plans
            d += 1
        per_agent[agent] = by_depth
        depths.append(d - 1)
    layers = []
    for d in range(1, max(depths, default=0) + 1):
        sets = {a: by_depth[d] for a, by_depth in per_agent.items() if d in by_depth}
        if d == 1:
            for a in per_agent:
                sets.setdefault(a, set())
        own = None
        if self_agent is not None and self_path and d <= len(self_path):
            own = (self_agent, self_path[d - 1])
        layers.append(CandidateSets.build(sets, own))
    return layers
