"""Belief ascription from recognized plans and consistency checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .plan_model import PlanLibrary, PropositionLiteral

NEGATED_TERMINATION = "negated-termination"
ASSERTED_PRECONDITION = "asserted-precondition"


class AscriptionError(ValueError):
    def __init__(self, agent: str, clashes: Iterable[str]):
        self.agent = agent
        self.clashes = sorted(clashes)
        super().__init__(f"contradictory beliefs ascribed to {agent!r}: {self.clashes}")


@dataclass(frozen=True)
class BeliefSet:
    agent: str
    literals: frozenset[PropositionLiteral]
    provenance: Mapping[PropositionLiteral, str] = field(default_factory=dict)

    def __str__(self) -> str:
        return "{" + ", ".join(str(lit) for lit in sorted(self.literals, key=_lit_key)) + "}"


def _lit_key(lit: PropositionLiteral):
    return (lit.name, not lit.positive)


@dataclass(frozen=True)
class Diagnosis:
    contradictions: frozenset[str]
    contributors: Mapping[str, frozenset[str]] = field(default_factory=dict)
    beliefs: tuple[BeliefSet, ...] = ()

    @property
    def verified(self) -> bool:
        return bool(self.contradictions)


def ascribe_beliefs(lib: PlanLibrary, path: Sequence[str], just_started=False,
                    agent: str = "") -> BeliefSet:
    """Beliefs implied by executing a path.

    Every plan on the path contributes its negated termination conditions.
    Preconditions are asserted for plans that have just begun: all of them
    when `just_started` is True, or those whose ids are in `just_started`.
    """
    if not lib.is_path(path):
        raise ValueError(f"{list(path)} is not a root-to-leaf path of the library")
    if just_started is True:
        fresh = set(path)
    elif not just_started:
        fresh = set()
    else:
        fresh = set(just_started)
    provenance: dict[PropositionLiteral, str] = {}
    for plan_id in path:
        node = lib.node(plan_id)
        for lit in node.terminations:
            provenance.setdefault(lit.negate(), NEGATED_TERMINATION)
        if plan_id in fresh:
            for lit in node.preconditions:
                provenance.setdefault(lit, ASSERTED_PRECONDITION)
    lits = frozenset(provenance)
    clashes = {lit.name for lit in lits if lit.negate() in lits}
    if clashes:
        raise AscriptionError(agent, clashes)
    return BeliefSet(agent, lits, provenance)


def check_consistency(sets: Sequence[BeliefSet]) -> Diagnosis:
    """Propositions held with opposite polarity by different agents."""
    if len(sets) < 2:
        raise ValueError("consistency checking needs at least two belief sets")
    holders: dict[tuple[str, bool], set[str]] = {}
    for bs in sets:
        for lit in bs.literals:
            holders.setdefault((lit.name, lit.positive), set()).add(bs.agent)
    contradictions = {}
    for (name, positive), agents in holders.items():
        if positive and (name, False) in holders:
            contradictions[name] = frozenset(agents | holders[(name, False)])
    return Diagnosis(frozenset(contradictions), contradictions, tuple(sets))


def diagnose_failure(lib: PlanLibrary,
                     chosen: Mapping[str, tuple[Sequence[str], object]]) -> Diagnosis:
    """Ascribe beliefs for each agent's chosen path, then look for contradictions.

    `chosen` maps agent id to (path, just_started) as accepted by
    ascribe_beliefs.
    """
    sets = [ascribe_beliefs(lib, path, fresh, agent=agent)
            for agent, (path, fresh) in sorted(chosen.items())]
    return check_consistency(sets)
