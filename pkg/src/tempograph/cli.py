"""Command line front end.

Four subcommands cover the workflow: `mine` builds a temporal profile from
an XES log (optionally infusing it into a model), `check` scores a log or a
live stream against a timed model, `replay` turns a log back into a paced
event stream, and `report` renders a saved check report.

A JSON config file may supply defaults for any flag of the chosen
subcommand; explicit flags win. The TEMPOGRAPH_LOG_LEVEL environment
variable sets logging verbosity (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .checking import (
    PER_EVENT,
    PERIODIC,
    STREAM_CLOCK,
    WALL_CLOCK,
    CheckerConfig,
    CostReport,
    StreamChecker,
    check_log,
)
from .evaluation import render_table, split_log, take_traces
from .mining import POPULATION, SAMPLE, MinerConfig, mine_profile
from .model import (
    TimedProcessModel,
    load_model,
    load_profile,
    save_model,
    save_profile,
)
from .streams import encode_event, open_source, read_events, replay, send_lines
from .xes import parse_xes

log = logging.getLogger("tempograph.cli")


def _setup_logging() -> None:
    level = os.environ.get("TEMPOGRAPH_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _load_config_defaults(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Apply --config JSON as subcommand defaults; flags still override."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    with open(known.config, encoding="utf-8") as handle:
        values = json.load(handle)
    if not isinstance(values, dict):
        raise SystemExit(f"config {known.config}: expected a JSON object")
    subcommand = next((a for a in argv if not a.startswith("-")), None)
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        sub = action.choices.get(subcommand)
        if sub is None:
            continue
        valid = {a.dest for a in sub._actions}  # noqa: SLF001
        unknown = set(values) - valid
        if unknown:
            raise SystemExit(
                f"config {known.config}: unknown keys for {subcommand}: "
                f"{sorted(unknown)}"
            )
        sub.set_defaults(**values)
    return argv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tempograph",
        description=(
            "Temporal conformance checking for event streams: mine duration "
            "and distance statistics from a log, attach them to a process "
            "model, and score live or replayed streams against it."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser(
        "mine",
        help="mine a temporal profile from an XES log",
        description=(
            "Scan start/complete pairs for task durations and "
            "complete-to-start gaps for inter-event distances, then write "
            "the aggregated profile as JSON."
        ),
    )
    mine.add_argument("--config", help="JSON file of flag defaults")
    mine.add_argument("--log", required=True, help="XES file (gzip sniffed)")
    group = mine.add_mutually_exclusive_group()
    group.add_argument(
        "--take-traces", type=int, metavar="N",
        help="train on the first N traces only",
    )
    group.add_argument(
        "--split", type=float, metavar="F",
        help="train on the first floor(F * traces) traces",
    )
    mine.add_argument(
        "--min-support", type=int, default=1, metavar="N",
        help="distance entries need at least N samples (durations always kept)",
    )
    mine.add_argument(
        "--stddev-mode", choices=[POPULATION, SAMPLE], default=POPULATION,
        help="population (divide by n) or sample (divide by n-1) stddev",
    )
    mine.add_argument("--profile-out", help="write the profile JSON here")
    mine.add_argument("--model", help="untimed model JSON to infuse")
    mine.add_argument("--model-out", help="write the infused model JSON here")

    check = sub.add_parser(
        "check",
        help="score a log or stream against a timed model",
        description=(
            "Per trace, the combined cost is a structural prefix-alignment "
            "cost plus a temporal cost. Each observed duration or distance x "
            "with profile stats (mu, sigma) scores omega * phi * z where "
            "z = |x - mu| / sigma, counted once z exceeds the task's kappa "
            "threshold (default 3). Unfinished tasks contribute a running "
            "estimate that is replaced on every clock tick. The trace table "
            "holds at most TSIZE in-flight traces; the oldest is evicted "
            "and finalized when a new trace would overflow it."
        ),
    )
    check.add_argument("--config", help="JSON file of flag defaults")
    source = check.add_mutually_exclusive_group(required=True)
    source.add_argument("--log", help="XES file to check offline")
    source.add_argument(
        "--stream",
        help="event stream: '-' for stdin, file:PATH, or tcp:HOST:PORT",
    )
    check.add_argument("--model", required=True, help="timed model JSON")
    check.add_argument(
        "--profile",
        help="profile JSON to infuse (overrides any embedded profile)",
    )
    check.add_argument(
        "--tsize", type=int, default=10000,
        help="max in-flight traces before LRU eviction (default 10000)",
    )
    check.add_argument(
        "--phi", type=float, default=1.0,
        help="global scaling factor applied to every temporal cost",
    )
    check.add_argument(
        "--inclusive-threshold", action="store_true",
        help="count deviations at z >= kappa instead of z > kappa",
    )
    check.add_argument(
        "--tick", default=PER_EVENT, metavar="POLICY",
        help="'per-event' (default) or 'every:SECONDS' periodic ticking",
    )
    check.add_argument(
        "--clock", choices=[STREAM_CLOCK, WALL_CLOCK], default=STREAM_CLOCK,
        help="advance time by event timestamps (stream) or wall time",
    )
    check.add_argument(
        "--no-structural", action="store_true",
        help="skip prefix alignment; combined cost is temporal only",
    )
    check.add_argument(
        "--tick-scans-completed", action="store_true",
        help="keep completed tasks in the unfinished-estimate scan",
    )
    check.add_argument(
        "--max-connections", type=int, metavar="N",
        help="for tcp streams: stop after N producers disconnect "
        "(default: listen forever; Ctrl-C finalizes)",
    )
    check.add_argument(
        "--budget", type=float,
        help="exit 1 if any trace's combined cost exceeds this",
    )
    check.add_argument("--report-out", help="write the full report JSON here")
    check.add_argument("--csv-out", help="write all deviations as CSV here")
    check.add_argument(
        "--deviations-out",
        help="append deviation records as JSON lines while checking",
    )
    check.add_argument(
        "--quiet", action="store_true",
        help="suppress the per-trace result lines",
    )

    replay_p = sub.add_parser(
        "replay",
        help="emit a log as a paced event stream",
        description=(
            "Events are merged across traces in timestamp order and written "
            "as JSON lines with their original timestamps. Speed divides the "
            "inter-event gaps (0 = flat out); jitter adds uniform extra "
            "delay per event."
        ),
    )
    replay_p.add_argument("--config", help="JSON file of flag defaults")
    replay_p.add_argument("--log", required=True, help="XES file to replay")
    replay_p.add_argument("--speed", type=float, default=1.0)
    replay_p.add_argument("--jitter", type=float, default=0.0)
    replay_p.add_argument("--seed", type=int, help="jitter RNG seed")
    replay_p.add_argument(
        "--sink", default="-",
        help="'-' for stdout (default) or tcp:HOST:PORT to connect and send",
    )

    report_p = sub.add_parser(
        "report",
        help="summarize a saved check report",
    )
    report_p.add_argument("--config", help="JSON file of flag defaults")
    report_p.add_argument("report", help="report JSON written by check")
    report_p.add_argument("--csv", help="also export the deviations as CSV")
    report_p.add_argument(
        "--top", type=int, default=10,
        help="show the N costliest traces (default 10)",
    )
    return parser


def _cmd_mine(args: argparse.Namespace) -> int:
    parsed = parse_xes(args.log)
    for warning in parsed.warnings[:10]:
        log.warning("%s", warning)
    if len(parsed.warnings) > 10:
        log.warning("... %d more parse warnings", len(parsed.warnings) - 10)
    train = parsed.log
    if args.take_traces is not None:
        train, _ = take_traces(train, args.take_traces)
    elif args.split is not None:
        train, _ = split_log(train, args.split)
    config = MinerConfig(min_support=args.min_support, stddev_mode=args.stddev_mode)
    profile = mine_profile(train, config)
    if args.profile_out:
        save_profile(profile, args.profile_out)
        print(f"wrote {len(profile)} entries to {args.profile_out}")
    if args.model:
        model = load_model(args.model)
        timed = model.infuse(profile)
        if not args.model_out:
            raise SystemExit("--model requires --model-out")
        save_model(timed, args.model_out)
        print(f"wrote infused model to {args.model_out}")
    rows = [
        [
            key.kind,
            key.to_string().split(":", 1)[1],
            str(stats.n),
            f"{stats.mean:.2f}",
            f"{stats.stddev:.2f}",
            f"{stats.min:.2f}",
            f"{stats.max:.2f}",
        ]
        for key, stats in profile.entries.items()
    ]
    print(render_table(["kind", "key", "n", "mean", "stddev", "min", "max"], rows))
    print(f"{len(train)} traces scanned, {len(profile)} profile entries")
    return 0


def _make_checker_config(args: argparse.Namespace) -> CheckerConfig:
    policy, interval = PER_EVENT, 0.0
    if args.tick != PER_EVENT:
        if not args.tick.startswith("every:"):
            raise SystemExit(f"--tick must be 'per-event' or 'every:SECONDS', got {args.tick!r}")
        policy = PERIODIC
        interval = float(args.tick.split(":", 1)[1])
    return CheckerConfig(
        tsize=args.tsize,
        phi=args.phi,
        inclusive_threshold=args.inclusive_threshold,
        tick_policy=policy,
        tick_interval=interval,
        clock=args.clock,
        structural=not args.no_structural,
        tick_scans_completed=args.tick_scans_completed,
    )


def _cmd_check(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    if args.profile:
        model = model.infuse(load_profile(args.profile))
    if not model.profile.entries:
        log.warning("model has no temporal profile; only structure is scored")
    config = _make_checker_config(args)

    exceeded: list[str] = []
    deviations_handle = (
        open(args.deviations_out, "w", encoding="utf-8")
        if args.deviations_out
        else None
    )

    def on_record(record) -> None:
        if deviations_handle:
            deviations_handle.write(json.dumps(record.to_json_dict()) + "\n")

    def on_trace_done(result) -> None:
        if args.budget is not None and result.combined > args.budget:
            exceeded.append(result.trace_id)
        if not args.quiet:
            flags = " evicted" if result.evicted else ""
            print(
                f"trace {result.trace_id}: structural={result.structural} "
                f"temporal={result.temporal:.3f} combined={result.combined:.3f}"
                f"{flags}"
            )

    try:
        if args.log:
            report = check_log(
                parse_xes(args.log).log,
                model,
                config,
                on_record=on_record,
                on_trace_done=on_trace_done,
            )
        else:
            checker = StreamChecker(
                model, config, on_record=on_record, on_trace_done=on_trace_done
            )
            source = open_source(args.stream, max_connections=args.max_connections)
            try:
                for event in read_events(
                    source, on_warning=lambda m: log.warning("%s", m)
                ):
                    checker.process(event)
            except KeyboardInterrupt:
                print("interrupted; finalizing open traces", file=sys.stderr)
            report = checker.finalize()
    finally:
        if deviations_handle:
            deviations_handle.close()

    _print_summary(report)
    if args.report_out:
        Path(args.report_out).write_text(report.to_json(), encoding="utf-8")
        print(f"report written to {args.report_out}")
    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8", newline="") as handle:
            report.write_csv(handle)
        print(f"deviations written to {args.csv_out}")
    if exceeded:
        print(
            f"budget {args.budget} exceeded by {len(exceeded)} trace(s): "
            + ", ".join(exceeded[:5])
            + ("..." if len(exceeded) > 5 else ""),
            file=sys.stderr,
        )
        return 1
    return 0


def _print_summary(report: CostReport) -> None:
    c = report.counters
    print(
        f"{c.events} events, {c.traces_seen} traces "
        f"({c.evictions} evicted, {c.resurrections} resurrected)"
    )
    print(
        f"durations: {c.duration_deviations}/{c.durations_checked} deviant, "
        f"distances: {c.distance_deviations}/{c.distances_checked} deviant"
    )
    for label, record in (
        ("duration", report.max_duration_z),
        ("distance", report.max_distance_z),
    ):
        if record:
            print(
                f"max {label} z: {record.z:.1f} "
                f"({record.key.to_string()} in trace {record.trace_id})"
            )


def _cmd_replay(args: argparse.Namespace) -> int:
    parsed = parse_xes(args.log)
    events = replay(parsed.log, speed=args.speed, jitter=args.jitter, seed=args.seed)
    if args.sink == "-":
        count = 0
        for event in events:
            print(encode_event(event), flush=args.speed != 0)
            count += 1
    elif args.sink.startswith("tcp:"):
        _, host, port = args.sink.split(":", 2)
        count = send_lines(host, int(port), (encode_event(e) for e in events))
    else:
        raise SystemExit(f"--sink must be '-' or tcp:HOST:PORT, got {args.sink!r}")
    print(f"{count} events sent", file=sys.stderr)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    with open(args.report, encoding="utf-8") as handle:
        data = json.load(handle)
    counters = data.get("counters", {})
    print(
        f"{counters.get('events', 0)} events, "
        f"{counters.get('traces_seen', 0)} traces"
    )
    print(
        f"durations: {counters.get('duration_deviations', 0)}"
        f"/{counters.get('durations_checked', 0)} deviant, "
        f"distances: {counters.get('distance_deviations', 0)}"
        f"/{counters.get('distances_checked', 0)} deviant"
    )
    for label in ("duration", "distance"):
        record = (data.get("max_z") or {}).get(label)
        if record:
            print(
                f"max {label} z: {record['z']:.1f} "
                f"({record['key']} in trace {record['trace']})"
            )
    traces = data.get("traces", {})
    costliest = sorted(
        traces.items(), key=lambda item: item[1]["combined"], reverse=True
    )[: args.top]
    if costliest:
        rows = [
            [
                trace_id,
                str(result["structural"]),
                f"{result['temporal']:.3f}",
                f"{result['combined']:.3f}",
                str(len(result["deviations"])),
            ]
            for trace_id, result in costliest
        ]
        print()
        print(
            render_table(
                ["trace", "structural", "temporal", "combined", "deviations"], rows
            )
        )
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["trace", "kind", "key", "observed_s", "z", "cost", "at"])
            for result in traces.values():
                for d in result.get("deviations", ()):
                    writer.writerow(
                        [
                            d["trace"], d["kind"], d["key"],
                            d["observed_s"], d["z"], d["cost"], d["at"],
                        ]
                    )
        print(f"deviations written to {args.csv}")
    return 0


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _load_config_defaults(argv, parser)
    args = parser.parse_args(argv)
    handlers = {
        "mine": _cmd_mine,
        "check": _cmd_check,
        "replay": _cmd_replay,
        "report": _cmd_report,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
