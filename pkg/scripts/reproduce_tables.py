"""Print the ModSAF result tables (optionally as CSV files in a directory)."""

import argparse
from pathlib import Path

from teammon.scenario_sim import format_csv, format_text, load_scenario, run_permutations

RUNS = [
    ("table2", "example2", "A3", "optimistic"),
    ("table4", "example1", "A1", "optimistic"),
    ("table5", "example1", "A1", "pessimistic"),
    ("table7", "example1", "A3", "optimistic"),
    ("centralized", "example1", "A1", "centralized"),
    ("distributed", "example1", "all", "distributed"),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, help="write one CSV per table here")
    parser.add_argument("--deterministic", action="store_true",
                        help="ignore pinned tie-break seeds")
    args = parser.parse_args()
    for name, scenario_name, monitor, mode in RUNS:
        scenario = load_scenario(scenario_name)
        seed = None if args.deterministic else scenario.tie_break_seed
        runs = run_permutations(scenario, monitor, mode, seed)
        print(f"== {name}: {scenario.title} (monitor {monitor}, {mode})")
        print(format_text(runs, scenario.team.agents))
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{name}.csv").write_text(format_csv(runs, scenario.team.agents))


if __name__ == "__main__":
    main()
