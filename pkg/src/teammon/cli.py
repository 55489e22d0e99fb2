"""Command-line front end.

Exit status: 0 on success with nothing wrong found, 1 when the input was read
but is invalid (or the analysis found a problem), 2 on usage errors such as
unreadable files or unknown agent ids.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .plan_model import (ConfigurationError, LibraryError, PlanLibrary, TeamDefinition,
                         key_agents, library_from_dict, risky_points, validate_library)
from .scenario_sim import (ALL, MODES, ScenarioError, bundled, format_csv, format_text,
                           load_scenario, run_permutations)
from .trace_analytics import TraceParseError, agreement_histogram, ata, detect_switches, parse_trace

FORMAT_ENV = "TEAMMON_FORMAT"
OK, INVALID, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_json(path: str):
    p = Path(path)
    if not p.exists() and not p.suffix and bundled(path).exists():
        p = bundled(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise LibraryError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from None


def _library(path: str) -> tuple[PlanLibrary, dict]:
    data = _read_json(path)
    try:
        lib = library_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise LibraryError(f"{path}: malformed library: {exc}") from None
    return lib, data


def _team(lib: PlanLibrary, raw: dict, team_path: str | None) -> TeamDefinition:
    if team_path is not None:
        return TeamDefinition.from_json(_read_json(team_path))
    if "team" in raw:
        return TeamDefinition.from_json(raw["team"])
    roles = sorted(lib.roles)
    if len(roles) < 2:
        raise ConfigurationError("library has fewer than two roles; pass --team")
    return TeamDefinition(tuple((r, r) for r in roles))


def _plan_set(lib: PlanLibrary, args) -> list[str]:
    if args.plans:
        plans = [p.strip() for p in args.plans.split(",") if p.strip()]
        by_label = {n.label: n.id for n in lib.nodes if n.label}
        plans = [p if p in lib else by_label.get(p, p) for p in plans]
        unknown = [p for p in plans if p not in lib]
        if unknown:
            raise UsageError(f"unknown plans {unknown}")
        return plans
    if args.depth is not None:
        return lib.team_plans_at(args.depth)
    for d in range(1, lib.max_depth + 1):
        if len(lib.team_plans_at(d)) > 1:
            return lib.team_plans_at(d)
    return []


def role_group(team: TeamDefinition, roles) -> str:
    """Human cell text such as 'Scout and Attackers'."""
    names = []
    for role in sorted(roles, key=lambda r: (len(team.agents_with_roles([r])), r)):
        name = role.capitalize()
        names.append(name + "s" if len(team.agents_with_roles([role])) > 1 else name)
    return " and ".join(names)


def keyagent_matrix(lib: PlanLibrary, team: TeamDefinition, plans) -> list[list[str]]:
    """Square matrix, with a header row and column of plan labels."""
    keys = key_agents(lib, team, plans)
    labels = [lib.node(p).display for p in plans]
    rows = [[""] + labels]
    for p, lab in zip(plans, labels):
        row = [lab]
        for q in plans:
            row.append("-" if p == q else (role_group(team, keys[frozenset((p, q))]) or "none"))
        rows.append(row)
    return rows


def _emit(rows: list[list[str]], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    if not rows:
        return ""
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in rows)


# -- subcommands ---------------------------------------------------------------------

def cmd_validate(args, out) -> int:
    try:
        lib, _ = _library(args.library)
    except LibraryError as exc:
        print(exc, file=out)
        return INVALID
    violations = validate_library(lib)
    for v in violations:
        print(v, file=out)
    if violations:
        print(f"{len(violations)} violation(s)", file=out)
        return INVALID
    print(f"{lib.name or args.library}: ok ({len(lib.nodes)} plans, depth {lib.max_depth})", file=out)
    return OK


def cmd_permute(args, out) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    if args.monitor != ALL and args.monitor not in scenario.team.agents:
        raise UsageError(f"unknown monitor {args.monitor!r}; team is {list(scenario.team.agents)}")
    seed = args.seed
    if seed is None and not args.deterministic:
        seed = scenario.tie_break_seed
    runs = run_permutations(scenario, args.monitor, args.policy, seed)
    fmt = format_csv if args.format == "csv" else format_text
    out.write(fmt(runs, scenario.team.agents))
    return OK


def _key_setup(args):
    lib, raw = _library(args.library)
    violations = validate_library(lib)
    if violations:
        raise LibraryError(f"{args.library}: invalid library", violations)
    team = _team(lib, raw, args.team)
    return lib, team, _plan_set(lib, args)


def cmd_keyagents(args, out) -> int:
    lib, team, plans = _key_setup(args)
    if len(plans) < 2:
        return OK
    out.write(_emit(keyagent_matrix(lib, team, plans), args.format))
    return OK


def cmd_risky(args, out) -> int:
    lib, team, plans = _key_setup(args)
    pairs = sorted(sorted(lib.node(p).display for p in pair)
                   for pair in risky_points(lib, team, plans)) if len(plans) > 1 else []
    rows = [["plan_a", "plan_b"]] + pairs if args.format == "csv" else pairs
    out.write(_emit(rows, args.format))
    if args.format != "csv":
        print(f"{len(pairs)} risky pair(s)", file=out)
    return INVALID if pairs else OK


def cmd_analyze(args, out) -> int:
    team = TeamDefinition.from_json(_read_json(args.team)) if args.team else None
    if not Path(args.trace).exists():
        raise UsageError(f"cannot read {args.trace}")
    try:
        trace = parse_trace(Path(args.trace), team=team)
    except TraceParseError as exc:
        print(f"{args.trace}: {exc}", file=out)
        return INVALID
    switches = detect_switches(trace, args.include_joint)
    if args.format == "csv":
        rows = [["start", "end", "length"]] + [[str(s.start), str(s.end), str(s.length)]
                                               for s in switches]
        out.write(_emit(rows, "csv"))
        return OK
    value = ata(trace, args.include_joint)
    print(f"agents: {' '.join(trace.agents)}", file=out)
    print(f"run length: {trace.run_length}", file=out)
    print(f"switches: {len(switches)}", file=out)
    print(f"ATA: {float(value):.2f}", file=out)
    if switches:
        out.write(_emit([["start", "end", "length"]] +
                        [[str(s.start), str(s.end), str(s.length)] for s in switches], "text"))
    print("agreement level histogram:", file=out)
    for level, count in agreement_histogram(trace).items():
        print(f"  {str(level):>6}  {count}", file=out)
    return OK


# -- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    default_fmt = os.environ.get(FORMAT_ENV, "text")
    if default_fmt not in ("text", "csv"):
        default_fmt = "text"
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv"), default=default_fmt,
                        help=f"output format (default from ${FORMAT_ENV}, else text)")

    parser = argparse.ArgumentParser(prog="teammon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a plan library")
    p.add_argument("library")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("permute", parents=[common], help="run every case of a scenario")
    p.add_argument("scenario", help="scenario file or bundled name (example1, example2)")
    p.add_argument("--monitor", default=ALL, help="monitoring agent id, or 'all'")
    p.add_argument("--policy", choices=MODES, default="optimistic")
    p.add_argument("--seed", type=int, default=None, help="seed for random tie-breaks")
    p.add_argument("--deterministic", action="store_true",
                   help="ignore any seed pinned in the scenario and break ties by plan id")
    p.set_defaults(func=cmd_permute)

    for name, func, text in (("keyagents", cmd_keyagents, "key roles for each plan pair"),
                             ("risky", cmd_risky, "plan pairs without a key agent")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("library")
        p.add_argument("--team", help="team JSON (default: the library's team, else one agent per role)")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--plans", help="comma-separated plan ids or labels")
        group.add_argument("--depth", type=int, help="use every team plan at this depth")
        p.set_defaults(func=func)

    p = sub.add_parser("analyze", parents=[common], help="switches and ATA for a trace")
    p.add_argument("trace")
    p.add_argument("--team", help="team JSON; agents in the trace must match it")
    p.add_argument("--include-joint", action="store_true",
                   help="count unanimous plan changes as zero-length switches")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2 ** 64:
        print("teammon: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return USAGE
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"teammon: {exc}", file=sys.stderr)
        return USAGE
    except LibraryError as exc:
        print(f"teammon: {exc}", file=sys.stderr)
        for v in exc.violations or []:
            print(f"  {v}", file=sys.stderr)
        return INVALID
    except (ScenarioError, ConfigurationError, ValueError) as exc:
        print(f"teammon: {exc}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
