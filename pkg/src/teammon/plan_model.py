"""Plan-library data model and static team analyses.

A library is a single decomposition tree of reactive plans shared by every
agent.  Team plans sit at the top of every root-to-leaf path; each node holds
one observable behavior signature per role that executes it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping

TEAM = "team"
INDIVIDUAL = "individual"

NEGATION_PREFIXES = ("¬", "!", "~")


class LibraryError(ValueError):
    """Raised when a plan library or team definition cannot be used."""

    def __init__(self, message: str, violations: list[Violation] | None = None):
        super().__init__(message)
        self.violations = violations or []


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PropositionLiteral:
    name: str
    positive: bool = True

    def __post_init__(self):
        if not self.name:
            raise ValueError("literal name must be non-empty")

    def negate(self) -> PropositionLiteral:
        return PropositionLiteral(self.name, not self.positive)

    @classmethod
    def parse(cls, text: str) -> PropositionLiteral:
        text = text.strip()
        for prefix in NEGATION_PREFIXES:
            if text.startswith(prefix):
                return cls(text[len(prefix):].strip(), False)
        return cls(text, True)

    def __str__(self) -> str:
        return self.name if self.positive else "¬" + self.name


Signature = frozenset  # frozenset[str] of observable feature tokens


@dataclass(frozen=True)
class PlanNode:
    id: str
    kind: str = TEAM
    children: tuple[str, ...] = ()
    preconditions: frozenset[PropositionLiteral] = frozenset()
    terminations: frozenset[PropositionLiteral] = frozenset()
    signatures: Mapping[str, frozenset[str]] = field(default_factory=dict)
    label: str | None = None

    @property
    def is_team(self) -> bool:
        return self.kind == TEAM

    @property
    def display(self) -> str:
        return self.label or self.id


@dataclass(frozen=True)
class Violation:
    node: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.node}: [{self.rule}] {self.message}"


@dataclass(frozen=True)
class PlanLibrary:
    root: str
    nodes: tuple[PlanNode, ...]
    roles: frozenset[str]
    name: str = ""

    @cached_property
    def index(self) -> dict[str, PlanNode]:
        out: dict[str, PlanNode] = {}
        for node in self.nodes:
            out.setdefault(node.id, node)
        return out

    def node(self, plan_id: str) -> PlanNode:
        try:
            return self.index[plan_id]
        except KeyError:
            raise KeyError(f"unknown plan {plan_id!r}") from None

    def __contains__(self, plan_id: str) -> bool:
        return plan_id in self.index

    @cached_property
    def parent(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for node in self.nodes:
            for child in node.children:
                out.setdefault(child, node.id)
        return out

    @cached_property
    def depth(self) -> dict[str, int]:
        """Depth of each reachable node; the root is at depth 1."""
        out: dict[str, int] = {}
        if self.root not in self.index:
            return out
        stack = [(self.root, 1)]
        while stack:
            plan_id, d = stack.pop()
            if plan_id in out or plan_id not in self.index:
                continue
            out[plan_id] = d
            stack.extend((c, d + 1) for c in self.index[plan_id].children)
        return out

    @cached_property
    def max_depth(self) -> int:
        return max(self.depth.values(), default=0)

    def plans_at(self, depth: int) -> list[str]:
        return [n.id for n in self.nodes if self.depth.get(n.id) == depth]

    def team_plans_at(self, depth: int) -> list[str]:
        return [p for p in self.plans_at(depth) if self.node(p).is_team]

    def signature(self, plan_id: str, role: str) -> frozenset[str] | None:
        return self.node(plan_id).signatures.get(role)

    def path_to(self, plan_id: str) -> tuple[str, ...]:
        """Root-to-node chain of ids."""
        chain = [plan_id]
        while chain[-1] != self.root:
            chain.append(self.parent[chain[-1]])
            if len(chain) > len(self.nodes):
                raise LibraryError(f"cycle above {plan_id!r}")
        return tuple(reversed(chain))

    @cached_property
    def leaf_paths(self) -> tuple[tuple[str, ...], ...]:
        out = []

        def walk(plan_id: str, prefix: tuple[str, ...]):
            prefix = prefix + (plan_id,)
            node = self.index[plan_id]
            if not node.children:
                out.append(prefix)
            for child in node.children:
                if child in self.index and child not in prefix:
                    walk(child, prefix)

        if self.root in self.index:
            walk(self.root, ())
        return tuple(out)

    def is_path(self, path: Iterable[str]) -> bool:
        return tuple(path) in set(self.leaf_paths)

    def executing_roles(self, plan_id: str) -> frozenset[str]:
        """Roles that execute a plan: its own signatures plus its descendants'."""
        return self._executing_roles[plan_id]

    @cached_property
    def _executing_roles(self) -> dict[str, frozenset[str]]:
        out: dict[str, frozenset[str]] = {}

        def walk(plan_id: str) -> frozenset[str]:
            if plan_id in out:
                return out[plan_id]
            node = self.index[plan_id]
            roles = set(node.signatures)
            for child in node.children:
                if child in self.index:
                    roles |= walk(child)
            out[plan_id] = frozenset(roles)
            return out[plan_id]

        for plan_id in self.depth:
            walk(plan_id)
        return out

    def leaf_signatures(self, plan_id: str, role: str) -> set[frozenset[str]]:
        """Signatures the role may show at leaves under (or at) a plan."""
        node = self.node(plan_id)
        if not node.children:
            sig = node.signatures.get(role)
            return {sig} if sig is not None else set()
        out: set[frozenset[str]] = set()
        for child in node.children:
            out |= self.leaf_signatures(child, role)
        return out


@dataclass(frozen=True)
class TeamDefinition:
    members: tuple[tuple[str, str], ...]  # (agent-id, role)

    def __post_init__(self):
        if len(self.members) < 2:
            raise ConfigurationError("a team needs at least two members")
        ids = [a for a, _ in self.members]
        if len(set(ids)) != len(ids):
            raise ConfigurationError(f"duplicate agent ids in team: {ids}")

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.members)

    @property
    def roles(self) -> frozenset[str]:
        return frozenset(r for _, r in self.members)

    def role_of(self, agent: str) -> str:
        for a, r in self.members:
            if a == agent:
                return r
        raise ConfigurationError(f"unknown agent {agent!r}")

    def agents_with_roles(self, roles: Iterable[str]) -> tuple[str, ...]:
        roles = set(roles)
        return tuple(a for a, r in self.members if r in roles)

    @classmethod
    def from_json(cls, data) -> TeamDefinition:
        members = []
        for entry in data:
            if isinstance(entry, Mapping):
                members.append((str(entry["agent"]), str(entry["role"])))
            else:
                agent, role = entry
                members.append((str(agent), str(role)))
        return cls(tuple(members))

    def to_json(self) -> list[dict]:
        return [{"agent": a, "role": r} for a, r in self.members]


# -- loading -----------------------------------------------------------------

def _literals(items) -> frozenset[PropositionLiteral]:
    return frozenset(PropositionLiteral.parse(str(x)) for x in items or ())


def library_from_dict(data: Mapping) -> PlanLibrary:
    """Build a library from its JSON form without validating it."""
    nodes = []
    for raw in data["nodes"]:
        sigs = {str(role): frozenset(map(str, feats))
                for role, feats in (raw.get("signatures") or {}).items()}
        nodes.append(PlanNode(
            id=str(raw["id"]),
            kind=str(raw.get("kind", TEAM)),
            children=tuple(map(str, raw.get("children", ()))),
            preconditions=_literals(raw.get("pre")),
            terminations=_literals(raw.get("term")),
            signatures=sigs,
            label=raw.get("label"),
        ))
    roles = data.get("roles")
    if roles is None:
        roles = sorted({r for n in nodes for r in n.signatures})
    root = data.get("root") or (nodes[0].id if nodes else "")
    return PlanLibrary(root=str(root), nodes=tuple(nodes),
                       roles=frozenset(map(str, roles)), name=str(data.get("name", "")))


def library_to_dict(lib: PlanLibrary) -> dict:
    out = []
    for n in lib.nodes:
        entry = {"id": n.id, "kind": n.kind, "children": list(n.children),
                 "pre": sorted(map(str, n.preconditions)),
                 "term": sorted(map(str, n.terminations)),
                 "signatures": {r: sorted(s) for r, s in sorted(n.signatures.items())}}
        if n.label:
            entry["label"] = n.label
        out.append(entry)
    return {"name": lib.name, "root": lib.root, "roles": sorted(lib.roles), "nodes": out}


def load_library(source: str | Path | Mapping) -> PlanLibrary:
    """Load and validate a library from a JSON file or an already-parsed dict.

    Raises LibraryError carrying the violations when validation fails.
    """
    if isinstance(source, Mapping):
        data = source
    else:
        with open(source, encoding="utf-8") as fh:
            data = json.load(fh)
    try:
        lib = library_from_dict(data)
    except (KeyError, TypeError, AttributeError) as exc:
        raise LibraryError(f"malformed library: {exc!r}") from exc
    report = validate_library(lib)
    if report:
        raise LibraryError(f"library {lib.name or source!s} failed validation "
                           f"({len(report)} violations)", report)
    return lib


# -- operations --------------------------------------------------------------

def validate_library(lib: PlanLibrary) -> list[Violation]:
    """Check structural and signature invariants; violations are returned, not raised."""
    report: list[Violation] = []
    seen: set[str] = set()
    for node in lib.nodes:
        if node.id in seen:
            report.append(Violation(node.id, "duplicate-id", "id used by more than one node"))
        seen.add(node.id)
        if node.kind not in (TEAM, INDIVIDUAL):
            report.append(Violation(node.id, "kind", f"unknown kind {node.kind!r}"))
        for role, sig in node.signatures.items():
            if role not in lib.roles:
                report.append(Violation(node.id, "unknown-role", f"role {role!r} not declared"))
            if not sig:
                report.append(Violation(node.id, "empty-signature", f"empty signature for {role!r}"))
        for child in node.children:
            if child not in lib.index:
                report.append(Violation(node.id, "unknown-child", f"child {child!r} not defined"))

    if lib.root not in lib.index:
        report.append(Violation(lib.root or "<root>", "missing-root", "root node not defined"))
        return report

    parents: dict[str, list[str]] = {}
    for node in lib.nodes:
        for child in node.children:
            parents.setdefault(child, []).append(node.id)
    for child, ps in parents.items():
        if child == lib.root:
            report.append(Violation(child, "root-has-parent", f"root listed as child of {ps}"))
        elif len(ps) > 1:
            report.append(Violation(child, "multiple-parents", f"parents {ps}"))

    # reachability and cycles
    visiting: set[str] = set()
    done: set[str] = set()

    def walk(plan_id: str):
        visiting.add(plan_id)
        for child in lib.index[plan_id].children:
            if child not in lib.index:
                continue
            if child in visiting:
                report.append(Violation(child, "cycle", f"cycle through {plan_id!r}"))
            elif child not in done:
                walk(child)
        visiting.discard(plan_id)
        done.add(plan_id)

    walk(lib.root)
    for node in lib.nodes:
        if node.id not in done:
            report.append(Violation(node.id, "unreachable", "not reachable from root"))
    if any(v.rule in ("cycle", "multiple-parents", "root-has-parent") for v in report):
        return report

    for node in lib.nodes:
        if node.id not in done:
            continue
        if node.is_team and node.id != lib.root:
            parent = lib.index[lib.parent[node.id]]
            if not parent.is_team:
                report.append(Violation(node.id, "team-prefix",
                                        f"team plan under individual plan {parent.id!r}"))
        if not node.children and not node.signatures:
            report.append(Violation(node.id, "leaf-signature", "leaf executable by no role"))
        if node.children:
            for role, sig in node.signatures.items():
                if sig and sig not in lib.leaf_signatures(node.id, role):
                    report.append(Violation(
                        node.id, "uncovered-signature",
                        f"signature for {role!r} is shown by no leaf below the plan"))
    return report


def _check_roles(lib: PlanLibrary, team: TeamDefinition):
    unknown = team.roles - lib.roles
    if unknown:
        raise ConfigurationError(f"team references unknown roles {sorted(unknown)}")


def is_simple_team(lib: PlanLibrary, team: TeamDefinition) -> bool:
    """True iff every team plan is executed jointly by all of the team's roles."""
    _check_roles(lib, team)
    for node in lib.nodes:
        if node.is_team and node.id in lib.depth:
            if not team.roles <= lib.executing_roles(node.id):
                return False
    return True


def sub_team(lib: PlanLibrary, team: TeamDefinition, agent_a: str, agent_b: str,
             depth: int) -> bool:
    """True if the two agents belong to different sub-teams at a depth.

    Accepted for completeness of the data model; detection supports simple
    teams only and never consults it.
    """
    role_a, role_b = team.role_of(agent_a), team.role_of(agent_b)
    for plan_id in lib.team_plans_at(depth):
        roles = lib.executing_roles(plan_id)
        if (role_a in roles) != (role_b in roles):
            return True
    return False


def matching_plans(lib: PlanLibrary, role: str, sig: Iterable[str], depth: int,
                   excluded: list[str] | None = None) -> set[str]:
    """Plans at a depth whose signature for the role equals the observed one.

    Plans the role does not execute are skipped; pass a list as `excluded`
    to collect their ids.
    """
    sig = frozenset(sig)
    out = set()
    for plan_id in lib.plans_at(depth):
        own = lib.signature(plan_id, role)
        if own is None:
            if excluded is not None:
                excluded.append(plan_id)
        elif own == sig:
            out.add(plan_id)
    return out


def _common_depth(lib: PlanLibrary, plans: Iterable[str]) -> int | None:
    depths = {lib.depth[p] for p in plans}
    if len(depths) > 1:
        raise ConfigurationError(f"plans lie at different depths: {sorted(depths)}")
    return depths.pop() if depths else None


def key_agents(lib: PlanLibrary, team: TeamDefinition,
               plans: Iterable[str]) -> dict[frozenset[str], frozenset[str]]:
    """Map each unordered pair of distinct plans to the roles that tell them apart."""
    plans = sorted(set(plans))
    depth = _common_depth(lib, plans)
    _check_roles(lib, team)
    out = {}
    for p, q in combinations(plans, 2):
        pair = {p, q}
        keys = set()
        for role in team.roles:
            sp, sq = lib.signature(p, role), lib.signature(q, role)
            if sp is None or sq is None:
                continue
            seen_p = matching_plans(lib, role, sp, depth) & pair
            seen_q = matching_plans(lib, role, sq, depth) & pair
            if not seen_p & seen_q:
                keys.add(role)
        out[frozenset(pair)] = frozenset(keys)
    return out


def is_observably_partitioned(lib: PlanLibrary, team: TeamDefinition,
                              plans: Iterable[str]) -> tuple[bool, frozenset[str]]:
    keys = key_agents(lib, team, plans)
    ok = all(keys.values())
    return ok, frozenset().union(*keys.values()) if keys else frozenset()


def risky_points(lib: PlanLibrary, team: TeamDefinition,
                 plans: Iterable[str]) -> set[frozenset[str]]:
    """Plan pairs without a key agent, where disagreement can pass unnoticed."""
    return {pair for pair, keys in key_agents(lib, team, plans).items() if not keys}
