"""Off-line teamwork-quality analysis of execution traces.

A trace records, for every tick, the team plan each agent is executing.  A
switch runs from the tick unanimity is first broken to the next tick the
team is unanimous again; average time to agreement (ATA) is the mean switch
length over a run.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .hypothesis import coherence
from .plan_model import TeamDefinition

HEADER = ("tick", "agent_id", "plan_id")


class TraceParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Trace:
    agents: tuple[str, ...]
    records: tuple[Mapping[str, str], ...]
    team: TeamDefinition | None = None

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(sorted(self.agents)))
        object.__setattr__(self, "records", tuple(dict(r) for r in self.records))
        for t, rec in enumerate(self.records):
            if set(rec) != set(self.agents):
                raise ValueError(f"tick {t} does not cover exactly the agents {list(self.agents)}")

    @property
    def run_length(self) -> int:
        return len(self.records)

    @classmethod
    def from_columns(cls, columns: Mapping[str, Sequence[str]], team=None) -> Trace:
        """Build from one plan sequence per agent (all the same length)."""
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ValueError("agent columns differ in length")
        n = lengths.pop() if lengths else 0
        records = [{a: seq[t] for a, seq in columns.items()} for t in range(n)]
        return cls(tuple(columns), tuple(records), team)


@dataclass(frozen=True)
class SwitchInterval:
    start: int
    end: int

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError("switch ends before it starts")

    @property
    def length(self) -> int:
        return self.end - self.start


def parse_trace(source, *, team: TeamDefinition | None = None,
                plans: Iterable[str] | None = None) -> Trace:
    """Read `tick,agent_id,plan_id` CSV from a path, open file or multi-line string.

    Rows must be sorted by tick then agent, ticks contiguous from 0, and every
    agent present at every tick.  With `team`, agents must be its members;
    with `plans`, plan ids must be known.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        text = Path(source).read_text()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    known = None if plans is None else set(plans)
    members = None if team is None else set(team.agents)

    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None:
        raise TraceParseError("empty trace", 1)
    if tuple(h.strip() for h in header) != HEADER:
        raise TraceParseError(f"expected header {','.join(HEADER)}", 1)

    records: list[dict[str, str]] = []
    agents: list[str] | None = None
    current: dict[str, str] = {}
    tick = 0
    line = 1

    def close(at_line: int):
        nonlocal agents
        if agents is None:
            agents = sorted(current)
            if members is not None and set(agents) != members:
                missing = sorted(members - set(agents))
                raise TraceParseError(f"tick 0 lacks agents {missing}", at_line)
        elif sorted(current) != agents:
            missing = sorted(set(agents) - set(current))
            raise TraceParseError(f"tick {tick} lacks agents {missing}", at_line)
        records.append(dict(current))

    for line, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise TraceParseError(f"expected 3 fields, got {len(row)}", line)
        raw_tick, agent, plan = (c.strip() for c in row)
        try:
            t = int(raw_tick)
        except ValueError:
            raise TraceParseError(f"bad tick {raw_tick!r}", line) from None
        if not agent or not plan:
            raise TraceParseError("empty agent or plan id", line)
        if t != tick:
            if t != tick + 1 or not current:
                raise TraceParseError(f"tick {t} out of sequence after tick {tick}", line)
            close(line)
            tick, current = t, {}
        elif not records and not current and t != 0:
            raise TraceParseError("ticks must start at 0", line)
        if members is not None and agent not in members:
            raise TraceParseError(f"unknown agent {agent!r}", line)
        if agents is not None and agent not in agents:
            raise TraceParseError(f"agent {agent!r} absent from tick 0", line)
        if current and agent <= max(current):
            raise TraceParseError(f"agent {agent!r} duplicated or out of order", line)
        if known is not None and plan not in known:
            raise TraceParseError(f"unknown plan {plan!r}", line)
        current[agent] = plan
    if not current:
        raise TraceParseError("trace has no records", line)
    close(line + 1)
    return Trace(tuple(agents), tuple(records), team)


def write_trace(trace: Trace, out: TextIO | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for t, rec in enumerate(trace.records):
        for agent in trace.agents:
            w.writerow((t, agent, rec[agent]))
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def _unanimous(rec: Mapping[str, str]) -> bool:
    return len(set(rec.values())) == 1


def detect_switches(trace: Trace, include_joint: bool = False) -> list[SwitchInterval]:
    """Maximal disagreement intervals, in order.

    A disagreement still open at the end of the run is closed at run_length.
    With `include_joint`, a unanimous change of plan from one tick to the
    next is reported as a zero-length switch.
    """
    out = []
    start = None
    prev = None
    for t, rec in enumerate(trace.records):
        if _unanimous(rec):
            if start is not None:
                out.append(SwitchInterval(start, t))
                start = None
            elif include_joint and prev is not None and prev != rec:
                out.append(SwitchInterval(t, t))
        elif start is None:
            start = t
        prev = rec
    if start is not None:
        out.append(SwitchInterval(start, trace.run_length))
    return out


def ata(trace: Trace, include_joint: bool = False) -> Fraction:
    switches = detect_switches(trace, include_joint)
    if not switches:
        return Fraction(0)
    return Fraction(sum(s.length for s in switches), len(switches))


def agreement_level(trace: Trace, tick: int) -> Fraction:
    if not 0 <= tick < trace.run_length:
        raise IndexError(f"tick {tick} outside run of {trace.run_length}")
    return coherence(trace.records[tick])


def agreement_histogram(trace: Trace) -> dict[Fraction, int]:
    counts = Counter(agreement_level(trace, t) for t in range(trace.run_length))
    return dict(sorted(counts.items()))
