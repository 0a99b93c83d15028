#!/usr/bin/env python3
"""Run the BPI Challenge 2012 benchmark and print the comparison tables.

Mines durations and distances from the first 10469 traces, checks the
remaining traces (kappa 3, phi 1), and prints the mined statistics next to
the published reference values. Exits 1 when the dataset is missing.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from tempograph.evaluation import (
    EXPECTED_BPIC2012_CHECK,
    EXPECTED_BPIC2012_DISTANCES,
    EXPECTED_BPIC2012_DURATIONS,
    render_table,
    run_bpic2012_experiment,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", help="path to the .xes(.gz) file")
    parser.add_argument("--min-support", type=int, default=200)
    parser.add_argument("--json-out", help="write the result JSON here")
    args = parser.parse_args()

    result = run_bpic2012_experiment(args.dataset, min_support=args.min_support)
    if result.status != "ok":
        print(f"status: {result.status}", file=sys.stderr)
        print("run scripts/fetch_bpic2012.py first", file=sys.stderr)
        return 1

    print(
        f"{result.train_traces} training traces, {result.test_traces} test "
        f"traces; mined in {result.mine_seconds:.1f}s, checked in "
        f"{result.check_seconds:.1f}s ({result.stddev_mode} stddev)"
    )

    rows = []
    for activity, expected in EXPECTED_BPIC2012_DURATIONS.items():
        actual = result.duration_stats.get(activity)
        rows.append(
            [
                activity,
                f"{actual.n}" if actual else "-",
                f"{expected['n']:.0f}",
                f"{actual.mean:.2f}" if actual else "-",
                f"{expected['mean']:.2f}",
                f"{actual.stddev:.2f}" if actual else "-",
                f"{expected['stddev']:.2f}",
            ]
        )
    print()
    print("task durations (mined vs reference):")
    print(
        render_table(
            ["task", "n", "n(ref)", "mean", "mean(ref)", "stddev", "stddev(ref)"],
            rows,
        )
    )

    rows = []
    for (a, b), expected in EXPECTED_BPIC2012_DISTANCES.items():
        actual = result.distance_stats.get((a, b))
        rows.append(
            [
                f"{a} -> {b}",
                f"{actual.n}" if actual else "-",
                f"{expected['n']:.0f}",
                f"{actual.mean:.2f}" if actual else "-",
                f"{expected['mean']:.2f}",
            ]
        )
    print()
    print(f"temporal distances, support >= {args.min_support}:")
    print(render_table(["pair", "n", "n(ref)", "mean", "mean(ref)"], rows))

    print()
    surplus = len(result.distance_stats) - len(EXPECTED_BPIC2012_DISTANCES)
    print(
        f"distance entries mined: {len(result.distance_stats)} "
        f"(reference table has {len(EXPECTED_BPIC2012_DISTANCES)}, surplus {surplus})"
    )
    if result.duration_mismatches or result.distance_mismatches:
        print("mismatches against reference:")
        for key, problems in {
            **result.duration_mismatches,
            **result.distance_mismatches,
        }.items():
            print(f"  {key}: {'; '.join(problems)}")
    else:
        print("all mined statistics match the reference tables")

    print()
    print("checking the held-out traces:")
    for label, counters in (
        ("strict (z > kappa)", result.counters_strict),
        ("inclusive (z >= kappa)", result.counters_inclusive),
    ):
        print(
            f"  {label}: durations {counters['duration_deviations']}"
            f"/{counters['durations_checked']}, distances "
            f"{counters['distance_deviations']}/{counters['distances_checked']}"
        )
    print(
        f"  reference: durations "
        f"{EXPECTED_BPIC2012_CHECK['duration_deviations']}"
        f"/{EXPECTED_BPIC2012_CHECK['durations_checked']}, distances "
        f"{EXPECTED_BPIC2012_CHECK['distance_deviations']}"
        f"/{EXPECTED_BPIC2012_CHECK['distances_checked']}"
    )
    print(f"  matching strictness: {result.matching_strictness or 'neither'}")
    print(
        f"  max duration z: {result.max_duration_z:.1f} in trace "
        f"{result.max_duration_z_trace} (reference "
        f"{EXPECTED_BPIC2012_CHECK['max_duration_z']} in "
        f"{EXPECTED_BPIC2012_CHECK['max_duration_z_trace']})"
    )
    if result.duration_histogram:
        print(
            f"  duration deviations per trace: max "
            f"{max(result.duration_histogram.values())} across "
            f"{len(result.duration_histogram)} traces"
        )
    if result.distance_histogram:
        peak = max(result.distance_histogram.values())
        attained = sum(1 for v in result.distance_histogram.values() if v == peak)
        print(
            f"  distance deviations per trace: max {peak} attained by "
            f"{attained} trace(s)"
        )

    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(result.to_json_dict(), indent=2), encoding="utf-8"
        )
        print(f"\nresult JSON written to {args.json_out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
