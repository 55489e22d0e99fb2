"""Team-modeling hypotheses: coherence scoring and extreme selection.

Per-agent candidate sets are kept individually; the cartesian product of
them is never built on the selection path.  Maximal coherence means using as
few distinct plans as possible (a minimum cover of the agents by plans);
maximal incoherence means as many as possible (a maximum matching of agents
to distinct plans).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations, product
from math import prod
from typing import Iterator, Mapping


class ModelingIncompleteError(ValueError):
    """An agent has no candidate plan."""


class HypothesisSpaceTooLarge(ValueError):
    def __init__(self, size: int, bound: int):
        super().__init__(f"{size} hypotheses exceed the bound {bound}")
        self.size = size
        self.bound = bound


class Extreme(Enum):
    MAX_COHERENT = "max-coherent"
    MAX_INCOHERENT = "max-incoherent"


class TieBreak(Enum):
    DETERMINISTIC = "deterministic"
    SEEDED_RANDOM = "seeded-random"


@dataclass(frozen=True)
class CandidateSets:
    sets: Mapping[str, frozenset[str]]
    self_agent: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "sets", {a: frozenset(s) for a, s in self.sets.items()})
        if self.self_agent is not None:
            own = self.sets.get(self.self_agent)
            if own is None or len(own) != 1:
                raise ValueError(f"monitor {self.self_agent!r} must hold a singleton set")

    @classmethod
    def build(cls, sets: Mapping[str, object], self_plan: tuple[str, str] | None = None):
        sets = {a: frozenset(s) for a, s in sets.items()}
        agent = None
        if self_plan is not None:
            agent, plan = self_plan
            sets[agent] = frozenset([plan])
        return cls(sets, agent)

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(sorted(self.sets))

    def require_complete(self):
        empty = [a for a in self.agents if not self.sets[a]]
        if empty:
            raise ModelingIncompleteError(f"no candidate plans for {empty}")

    def size(self) -> int:
        return prod(len(self.sets[a]) for a in self.agents)

    def restrict(self, agents) -> CandidateSets:
        keep = set(agents)
        if self.self_agent is not None:
            keep.add(self.self_agent)
        return CandidateSets({a: s for a, s in self.sets.items() if a in keep}, self.self_agent)


@dataclass(frozen=True)
class TeamHypothesis:
    assignment: Mapping[str, str]
    coherence: Fraction = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "assignment", dict(sorted(self.assignment.items())))
        if self.coherence is None:
            object.__setattr__(self, "coherence", coherence(self.assignment))

    @property
    def key(self) -> tuple[tuple[str, str], ...]:
        return tuple(self.assignment.items())

    @property
    def plans(self) -> set[str]:
        return set(self.assignment.values())

    def __hash__(self):
        return hash(self.key)


def coherence(assignment: Mapping[str, str]) -> Fraction:
    """Agents modeled over distinct plans used."""
    if not assignment:
        raise ValueError("coherence of an empty assignment is undefined")
    return Fraction(len(assignment), len(set(assignment.values())))


# -- exact extremes ----------------------------------------------------------

def _min_new_plans(uncovered: list[frozenset[str]], plans: list[str], limit: int) -> int | None:
    """Fewest extra plans hitting every set in `uncovered`, or None above `limit`."""
    if not uncovered:
        return 0
    useful = sorted(set().union(*uncovered) & set(plans))
    for k in range(1, limit + 1):
        for combo in combinations(useful, k):
            chosen = set(combo)
            if all(s & chosen for s in uncovered):
                return k
    return None


def _max_matching(sets: list[frozenset[str]], allowed: set[str]) -> int:
    """Size of a maximum matching of sets to distinct allowed plans (Kuhn)."""
    owner: dict[str, int] = {}

    def augment(i: int, seen: set[str]) -> bool:
        for plan in sorted(sets[i] & allowed):
            if plan in seen:
                continue
            seen.add(plan)
            if plan not in owner or augment(owner[plan], seen):
                owner[plan] = i
                return True
        return False

    return sum(augment(i, set()) for i in range(len(sets)))


def min_distinct(cands: CandidateSets) -> int:
    sets = [cands.sets[a] for a in cands.agents]
    plans = sorted(set().union(*sets))
    return _min_new_plans(sets, plans, len(plans))


def max_distinct(cands: CandidateSets) -> int:
    sets = [cands.sets[a] for a in cands.agents]
    return _max_matching(sets, set().union(*sets))


def _preference(plans: frozenset[str], rng: random.Random | None) -> list[str]:
    order = sorted(plans)
    if rng is not None:
        rng.shuffle(order)
    return order


def select_extreme(cands: CandidateSets, extreme: Extreme,
                   tie_break: TieBreak = TieBreak.DETERMINISTIC,
                   rng: random.Random | None = None) -> TeamHypothesis:
    """Pick one hypothesis attaining the most (or least) coherence.

    Agents are fixed one at a time in id order, each taking the first plan in
    its preference order that still admits an optimal completion.  The
    preference order is plan-id order, or a seeded shuffle of it.
    """
    cands.require_complete()
    if tie_break is TieBreak.SEEDED_RANDOM and rng is None:
        raise ValueError("seeded-random tie-break needs an rng")
    if tie_break is TieBreak.DETERMINISTIC:
        rng = None
    agents = cands.agents
    sets = [cands.sets[a] for a in agents]
    all_plans = sorted(set().union(*sets))
    chosen: dict[str, str] = {}
    used: dict[str, int] = {}

    if extreme is Extreme.MAX_COHERENT:
        target = _min_new_plans(sets, all_plans, len(all_plans))
        for i, agent in enumerate(agents):
            rest = sets[i + 1:]
            for plan in _preference(sets[i], rng):
                now = set(used) | {plan}
                extra_budget = target - len(now)
                if extra_budget < 0:
                    continue
                uncovered = [s for s in rest if not s & now]
                extra = _min_new_plans(uncovered, [p for p in all_plans if p not in now],
                                       extra_budget)
                if extra is not None:
                    chosen[agent] = plan
                    used[plan] = used.get(plan, 0) + 1
                    break
    else:
        target = _max_matching(sets, set(all_plans))
        for i, agent in enumerate(agents):
            rest = sets[i + 1:]
            prefs = _preference(sets[i], rng)
            # spread repeats once full distinctness is out of reach
            prefs.sort(key=lambda p: used.get(p, 0))
            for plan in prefs:
                now = set(used) | {plan}
                free = set(all_plans) - now
                if len(now) + _max_matching(rest, free) >= target:
                    chosen[agent] = plan
                    used[plan] = used.get(plan, 0) + 1
                    break
    assert len(chosen) == len(agents)
    return TeamHypothesis(chosen)


def enumerate_hypotheses(cands: CandidateSets, bound: int = 100_000) -> Iterator[TeamHypothesis]:
    """Every element of the product of candidate sets, once each.  Test oracle."""
    cands.require_complete()
    size = cands.size()
    if size > bound:
        raise HypothesisSpaceTooLarge(size, bound)
    agents = cands.agents
    for combo in product(*(sorted(cands.sets[a]) for a in agents)):
        yield TeamHypothesis(dict(zip(agents, combo)))
