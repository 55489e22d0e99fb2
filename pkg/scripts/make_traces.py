"""Write the synthetic traces used to exercise the ATA analysis."""

import argparse
from pathlib import Path

from teammon.scenario_sim import case_trace, load_scenario
from teammon.trace_analytics import Trace, write_trace


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    n = 6000
    traces = {
        "never_agreeing": Trace.from_columns({"goalie": ["defend-goal"] * n,
                                              "defender": ["defend"] * n}),
        "perfect": Trace.from_columns({a: ["attack"] * 50 + ["defend"] * 50
                                       for a in ("p1", "p2", "p3")}),
    }
    scenario = load_scenario("example1")
    for case in scenario.cases:
        traces[f"example1_case{case.id}"] = case_trace(scenario, case)
    for name, trace in traces.items():
        (args.out / f"{name}.csv").write_text(write_trace(trace))
        print(f"{name}.csv: {trace.run_length} ticks")


if __name__ == "__main__":
    main()
