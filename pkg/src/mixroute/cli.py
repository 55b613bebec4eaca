"""Command-line entry point.

Subcommands:
    simulate  -- run one time-frame from a config file, write transcript,
                 result CSV, and summary
    verify    -- replay all checks over a transcript, print verdicts
    analyze   -- print closed-form capture probabilities (and optionally
                 a Monte Carlo cross-check)
    figures   -- emit the two reference CSV grids

Exit codes: 0 success, 1 protocol failure, 2 usage or config error.
"""

import argparse
import json
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_PROTOCOL = 1
EXIT_USAGE = 2


def _cmd_simulate(args) -> int:
    from mixroute.board import import_transcript
    from mixroute.config import config_echo, load_config
    from mixroute.engine import ConfigError, run_timeframe
    from mixroute.topology import TopologyError

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        result = run_timeframe(cfg)
    except (ConfigError, TopologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "transcript.jsonl").write_text(result.transcript or "", encoding="utf-8")

    rows = [
        ("seed", cfg.seed),
        ("group", cfg.group_name),
        ("submitted", len(result.submitted)),
        ("delivered", len(result.delivered)),
        ("delivered_all", str(result.delivered_all).lower()),
        ("reassignments", result.reassignments),
        ("failure", result.failure),
        ("verdict_failures", sum(1 for v in result.verdicts)),
    ]
    for ctr in sorted(result.layer_steps):
        rows.append((f"layer_{ctr}_steps", result.layer_steps[ctr]))
    for v in result.verdicts:
        rows.append((f"verdict_layer{v.ctr}_{v.subject}", v.status))
    csv_text = "metric,value\n" + "\n".join(f"{k},{v}" for k, v in rows) + "\n"
    (out / "result.csv").write_text(csv_text, encoding="utf-8")

    summary = [
        f"seed {cfg.seed}; {len(result.delivered)}/{len(result.submitted)} delivered",
        f"reassignments: {result.reassignments}",
    ]
    for ctr in sorted(result.layer_seconds):
        summary.append(f"layer {ctr}: {result.layer_seconds[ctr]:.3f}s wall clock")
    for v in result.verdicts:
        summary.append(f"verdict: layer {v.ctr} {v.subject}: {v.status} ({v.detail})")
    for note in result.anonymity_notes + result.misbehavior:
        summary.append(note)
    if result.failure:
        summary.append(f"FAILURE: {result.failure}")
    (out / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")

    manifest = {
        "config": config_echo(cfg),
        "seed": cfg.seed,
        "outputs": ["transcript.jsonl", "result.csv", "summary.txt"],
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    if result.failure:
        print(f"unrecoverable: {result.failure}", file=sys.stderr)
        return EXIT_PROTOCOL
    if not result.delivered_all:
        print("not all submitted messages were delivered", file=sys.stderr)
        return EXIT_PROTOCOL
    print(f"delivered {len(result.delivered)}/{len(result.submitted)}; outputs in {out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from mixroute.board import import_transcript
    from mixroute.serialization import DeserializationError
    from mixroute.verifier import verify_transcript

    try:
        text = Path(args.transcript).read_text(encoding="utf-8")
        entries = import_transcript(text)
    except (OSError, DeserializationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    report = verify_transcript(entries)
    if report.error:
        print(f"structural failure: {report.error}")
        return EXIT_PROTOCOL
    for v in report.verdicts:
        print(f"layer {v.ctr} {v.check} {v.subject}: {v.status}"
              + (f" ({v.detail})" if v.detail and not v.ok else ""))
    for note in report.notes:
        print(f"note: {note}")
    if report.ok:
        print("all checks passed")
        return EXIT_OK
    return EXIT_PROTOCOL


def _cmd_analyze(args, parser) -> int:
    from mixroute.analysis import CaptureQuery, capture_probability, monte_carlo_capture

    if args.fractions:
        try:
            fractions = tuple(float(x) for x in args.fractions.split(","))
        except ValueError:
            parser.error("--fractions must be a comma-separated list of numbers")
    else:
        if args.f is None:
            parser.error("either --f or --fractions is required")
        fractions = (args.f,) * args.layers
    if any(not 0.0 <= f <= 1.0 for f in fractions):
        parser.error("adversary fractions must lie in [0, 1]")
    if args.layers < 1:
        parser.error("--layers must be >= 1")
    query = CaptureQuery(fractions, args.mode)
    value = capture_probability(query)
    print(f"{value:.10g}")
    if args.trials:
        if args.mode != "mpr":
            parser.error("--trials only applies to mpr mode")
        mc = monte_carlo_capture(fractions[0], len(fractions), args.trials, seed=args.seed)
        print(
            f"empirical {mc.rate:.6g} over {mc.trials} messages, "
            f"99% CI [{mc.ci_low:.6g}, {mc.ci_high:.6g}], "
            f"analytic {mc.analytic:.6g} "
            f"{'inside' if mc.ci_contains_analytic else 'OUTSIDE'}"
        )
        return EXIT_OK if mc.ci_contains_analytic else EXIT_PROTOCOL
    return EXIT_OK


def _cmd_figures(args) -> int:
    from mixroute.analysis import figure_tables, format_table_a_csv, format_table_b_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table_a, table_b = figure_tables()
    (out / "capture_vs_fraction.csv").write_text(format_table_a_csv(table_a), encoding="utf-8")
    (out / "capture_vs_layers.csv").write_text(format_table_b_csv(table_b), encoding="utf-8")
    print(f"wrote capture_vs_fraction.csv ({len(table_a)} rows) and "
          f"capture_vs_layers.csv ({len(table_b)} rows) to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixroute",
        description="Layered mixnet with jointly randomized, verifiable routing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one time-frame from a config file")
    p.add_argument("--config", required=True, help="path to JSON config")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default="out", help="output directory [out]")

    p = sub.add_parser("verify", help="replay all checks over a transcript")
    p.add_argument("transcript", help="path to transcript.jsonl")

    p = sub.add_parser("analyze", help="print capture probabilities")
    p.add_argument("--mode", choices=("mpr", "parallel-baseline"), default="mpr")
    p.add_argument("--f", type=float, default=None, help="uniform per-layer adversary fraction")
    p.add_argument("--fractions", default="", help="comma-separated per-layer fractions")
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--trials", type=int, default=0,
                   help="also run a Monte Carlo cross-check over this many messages")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("figures", help="emit the two reference CSV grids")
    p.add_argument("--out", default="figures", help="output directory [figures]")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "analyze":
        return _cmd_analyze(args, parser)
    if args.command == "figures":
        return _cmd_figures(args)
    parser.error(f"unknown command {args.command!r}")  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
