"""Reactive plan recognition over the expanded plan hierarchy.

Each modeled agent gets its own copy of the whole hierarchy.  An observation
is compared with every plan's expected signature for the agent's role, then
matching is propagated upward so that complete root-to-leaf paths come out
flagged.  Matching is memoryless: only the latest observation counts, but
each node remembers the tick at which it last started matching.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Mapping

from .plan_model import PlanLibrary

PathFilter = Callable[[tuple[str, ...]], bool]


class OrderingError(ValueError):
    pass


class Truth(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Observation:
    agent: str
    tick: int
    signature: frozenset[str]

    def __post_init__(self):
        if self.tick < 0:
            raise ValueError("ticks are non-negative")
        object.__setattr__(self, "signature", frozenset(self.signature))


@dataclass(frozen=True)
class PlanPathHypothesis:
    agent: str
    path: tuple[str, ...]


@dataclass(frozen=True)
class AgentModel:
    library: PlanLibrary
    role: str
    agent: str | None = None
    matching: frozenset[str] = frozenset()
    selection_tick: Mapping[str, int] = field(default_factory=dict)
    # plan id -> (preconditions flag, terminations flag)
    conditions: Mapping[str, tuple[Truth, Truth]] = field(default_factory=dict)
    last_tick: int | None = None

    def is_matching(self, plan_id: str) -> bool:
        return plan_id in self.matching

    def just_started(self, plan_id: str) -> bool:
        return (self.last_tick is not None
                and self.selection_tick.get(plan_id) == self.last_tick)


def resl_init(lib: PlanLibrary, role: str, agent: str | None = None) -> AgentModel:
    unknown = (Truth.UNKNOWN, Truth.UNKNOWN)
    return AgentModel(library=lib, role=role, agent=agent,
                      conditions={n.id: unknown for n in lib.nodes})


def _propagate(lib: PlanLibrary, own: set[str]) -> set[str]:
    # A node matches on its own expectation or through any matching child;
    # a node whose children all fail keeps an own match.
    matching: set[str] = set()

    def visit(plan_id: str) -> bool:
        node = lib.node(plan_id)
        child_hits = [visit(c) for c in node.children]
        if plan_id in own or any(child_hits):
            matching.add(plan_id)
            return True
        return False

    visit(lib.root)
    return matching


def resl_update(model: AgentModel, obs: Observation) -> AgentModel:
    if model.agent is not None and obs.agent != model.agent:
        raise ValueError(f"observation of {obs.agent!r} fed to model of {model.agent!r}")
    if model.last_tick is not None and obs.tick <= model.last_tick:
        raise OrderingError(f"tick {obs.tick} not after last applied tick {model.last_tick}")
    lib = model.library
    own = {n.id for n in lib.nodes if n.signatures.get(model.role) == obs.signature}
    matching = _propagate(lib, own)

    ticks = dict(model.selection_tick)
    for plan_id in matching - model.matching:
        ticks[plan_id] = obs.tick

    conditions = {}
    for node in lib.nodes:
        if node.id in matching:
            fresh = ticks.get(node.id) == obs.tick
            conditions[node.id] = (Truth.TRUE if fresh else Truth.UNKNOWN, Truth.FALSE)
        else:
            conditions[node.id] = (Truth.UNKNOWN, Truth.UNKNOWN)

    return replace(model, agent=model.agent or obs.agent, matching=frozenset(matching),
                   selection_tick=ticks, conditions=conditions, last_tick=obs.tick)


def resl_run(lib: PlanLibrary, role: str, observations: Iterable[Observation],
             agent: str | None = None) -> AgentModel:
    model = resl_init(lib, role, agent)
    for obs in observations:
        model = resl_update(model, obs)
    return model


def matching_paths(model: AgentModel,
                   path_filter: PathFilter | None = None) -> set[PlanPathHypothesis]:
    """Root-to-leaf paths whose every node is flagged matching.

    `path_filter` prunes hypotheses using outside knowledge; it receives the
    path tuple and returns False to drop it.
    """
    out = set()
    for path in model.library.leaf_paths:
        if all(p in model.matching for p in path):
            if path_filter is None or path_filter(path):
                out.add(PlanPathHypothesis(model.agent or "", path))
    return out


def plans_at_depth(model: AgentModel, depth: int,
                   path_filter: PathFilter | None = None) -> set[str]:
    return {h.path[depth - 1] for h in matching_paths(model, path_filter)
            if len(h.path) >= depth}


def prune_plans(plans: Iterable[str]) -> PathFilter:
    """Path filter dropping every path through any of the given plans."""
    banned = frozenset(plans)
    return lambda path: not banned.intersection(path)
