"""Generated simple-team libraries for checking the detection guarantees.

Each library has a team root over k team plans, one agent per role.  What a
role looks like in each plan is a set partition of the plans: plans in one
block are indistinguishable for that role.  Libraries are generated up to
role symmetry (a multiset of partitions, one per agent), and every world
(assignment of actual plans to agents) is checked from every monitor.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
from typing import Iterator

from .detection import Policy, detect_distributed, detect_mutex, detect_teamwork
from .hypothesis import CandidateSets
from .plan_model import (PlanLibrary, TeamDefinition, is_observably_partitioned, key_agents,
                         library_from_dict, matching_plans)

ROOT = "root"


def set_partitions(k: int) -> list[tuple[int, ...]]:
    """All partitions of k items as restricted growth strings."""
    out = []

    def grow(prefix: tuple[int, ...], top: int):
        if len(prefix) == k:
            out.append(prefix)
            return
        for b in range(top + 2):
            grow(prefix + (b,), max(top, b))

    grow((0,), 0) if k else out.append(())
    return out


def build_library(partitions: tuple[tuple[int, ...], ...]) -> tuple[PlanLibrary, TeamDefinition]:
    n, k = len(partitions), len(partitions[0])
    roles = [f"r{i + 1}" for i in range(n)]
    plans = [f"P{j + 1}" for j in range(k)]
    nodes = [{"id": ROOT, "kind": "team", "children": plans, "signatures": {}}]
    for j, plan in enumerate(plans):
        nodes.append({"id": plan, "kind": "team", "children": [],
                      "signatures": {r: [f"look{part[j]}"] for r, part in zip(roles, partitions)}})
    lib = library_from_dict({"name": "generated", "root": ROOT, "roles": roles, "nodes": nodes})
    team = TeamDefinition(tuple((f"a{i + 1}", r) for i, r in enumerate(roles)))
    return lib, team


@dataclass
class SweepReport:
    configurations: int = 0
    libraries: int = 0
    partitioned: int = 0
    violations: dict[str, list] = field(default_factory=lambda: {
        "optimistic-sound": [], "pessimistic-complete": [], "mutex-sound": [],
        "mutex-complete": [], "distributed-exact": [], "key-agent-detects": []})
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def counts(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.violations.items()}


@dataclass(frozen=True)
class Grid:
    """Which (agents, plans) sizes to check, exhaustively or by seeded sampling."""
    agents: tuple[int, ...] = (2, 3, 4)
    plans: tuple[int, ...] = (2, 3, 4, 5)
    sampled: tuple[tuple[int, int], ...] = ((2, 5), (3, 4), (3, 5), (4, 4), (4, 5))
    libraries_per_sample: int = 80
    worlds_per_sample: int = 40
    seed: int = 0


def libraries(n: int, k: int, rng: random.Random | None = None,
              limit: int | None = None) -> Iterator[tuple[tuple[int, ...], ...]]:
    parts = set_partitions(k)
    if rng is None:
        yield from combinations_with_replacement(parts, n)
        return
    seen = set()
    while len(seen) < limit:
        combo = tuple(sorted(rng.choice(parts) for _ in range(n)))
        if combo not in seen:
            seen.add(combo)
            yield combo


def check_library(partitions, report: SweepReport, worlds=None):
    lib, team = build_library(partitions)
    agents = team.agents
    plans = lib.team_plans_at(2)
    seen_as = {(a, p): frozenset(matching_plans(lib, team.role_of(a), lib.signature(p, team.role_of(a)), 2))
               for a in agents for p in plans}
    keys = key_agents(lib, team, plans)
    partitioned, key_roles = is_observably_partitioned(lib, team, plans)
    key_ids = frozenset(team.agents_with_roles(key_roles))
    report.libraries += 1
    report.partitioned += partitioned
    root_layer = CandidateSets({a: {ROOT} for a in agents})
    tag = "/".join("".join(map(str, p)) for p in partitions)

    for world in (worlds if worlds is not None else product(plans, repeat=len(agents))):
        actual = dict(zip(agents, world))
        failure = len(set(world)) > 1
        clash = len(set(world)) < len(world)
        report.configurations += 1
        per_monitor = {}
        for m in agents:
            sets = {b: seen_as[(b, actual[b])] for b in agents if b != m}
            layer = CandidateSets.build(sets, (m, actual[m]))
            layers = [CandidateSets.build(root_layer.sets, (m, ROOT)), layer]
            per_monitor[m] = layers
            where = (tag, world, m)
            if detect_teamwork(lib, layers, Policy.OPTIMISTIC).detected and not failure:
                report.violations["optimistic-sound"].append(where)
            if failure and not detect_teamwork(lib, layers, Policy.PESSIMISTIC).detected:
                report.violations["pessimistic-complete"].append(where)
            if detect_mutex(layer, Policy.OPTIMISTIC, depth=2).detected and not clash:
                report.violations["mutex-sound"].append(where)
            if clash and not detect_mutex(layer, Policy.PESSIMISTIC, depth=2).detected:
                report.violations["mutex-complete"].append(where)
            # a monitor watching a key agent of its own plan and that agent's plan
            for b in agents:
                if b == m or actual[b] == actual[m]:
                    continue
                if team.role_of(b) in keys[frozenset((actual[m], actual[b]))]:
                    restricted = [c.restrict({b}) for c in layers]
                    if not detect_teamwork(lib, restricted, Policy.OPTIMISTIC).detected:
                        report.violations["key-agent-detects"].append(where + (b,))
        if partitioned:
            dv = detect_distributed(lib, team, per_monitor, observability=(key_ids, frozenset()))
            if dv.team.detected != failure:
                report.violations["distributed-exact"].append((tag, world))


def run_sweep(grid: Grid = Grid()) -> SweepReport:
    report = SweepReport()
    start = time.perf_counter()
    rng = random.Random(grid.seed)
    for n in grid.agents:
        for k in grid.plans:
            if (n, k) in grid.sampled:
                for parts in libraries(n, k, rng, grid.libraries_per_sample):
                    plans = [f"P{j + 1}" for j in range(k)]
                    worlds = [tuple(rng.choice(plans) for _ in range(n))
                              for _ in range(grid.worlds_per_sample)]
                    check_library(parts, report, worlds)
            else:
                for parts in libraries(n, k):
                    check_library(parts, report)
    report.seconds = time.perf_counter() - start
    return report
