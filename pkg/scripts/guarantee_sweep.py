"""Check the detection guarantees over generated simple-team libraries."""

import argparse

from teammon.sweep import Grid, run_sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--libraries", type=int, default=Grid.libraries_per_sample,
                        help="libraries per sampled grid cell")
    parser.add_argument("--worlds", type=int, default=Grid.worlds_per_sample,
                        help="worlds per sampled library")
    parser.add_argument("--exhaustive", action="store_true",
                        help="enumerate every grid cell (slow for 3+ agents and 4+ plans)")
    args = parser.parse_args()
    grid = Grid(sampled=() if args.exhaustive else Grid.sampled,
                libraries_per_sample=args.libraries, worlds_per_sample=args.worlds,
                seed=args.seed)
    report = run_sweep(grid)
    print(f"configurations: {report.configurations}")
    print(f"libraries: {report.libraries} ({report.partitioned} observably partitioned)")
    for name, count in report.counts().items():
        print(f"  {name:22s} violations: {count}")
    print(f"seconds: {report.seconds:.1f}")
    raise SystemExit(0 if report.ok else 1)


if __name__ == "__main__":
    main()
