"""Command-line entry point: run, validate, or summarize experiment sweeps."""

from __future__ import annotations

import argparse
import sys

from . import harness


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairfl",
        description="Fair private federated learning experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a sweep config and write the tradeoff table")
    run_p.add_argument("config", help="path to a key = value experiment config")
    run_p.add_argument("--seed-base", type=int, default=None, help="override the first trial seed")
    run_p.add_argument("--output", default=None, help="override the output CSV path")
    run_p.add_argument("--mode", default=None, help="override the experiment mode")
    run_p.add_argument("--jobs", type=int, default=None, help="concurrent grid cells")

    val_p = sub.add_parser("validate", help="check a config without training")
    val_p.add_argument("config")

    sum_p = sub.add_parser("summarize", help="recompute summary rows from a records CSV")
    sum_p.add_argument("records")
    sum_p.add_argument("--output", default=None, help="write instead of printing")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = harness.load_config(
                args.config,
                seed_base=args.seed_base,
                output=args.output,
                mode=args.mode,
                jobs=args.jobs,
            )
            records = harness.run_experiment(config)
            harness.emit_tradeoff_table(records, config.output)
            failed = sum(1 for r in records if not r.summary and r.status != "ok")
            total = sum(1 for r in records if not r.summary)
            print(f"wrote {config.output}: {total} runs ({failed} failed), "
                  f"{sum(1 for r in records if r.summary)} summary rows")
        elif args.command == "validate":
            config = harness.load_config(args.config)
            for note in harness.validate_config(config):
                print(note)
            print("config ok")
        else:  # summarize
            records = [r for r in harness.read_tradeoff_table(args.records) if not r.summary]
            summaries = harness.summarize_records(records)
            if args.output:
                harness.emit_tradeoff_table(records + summaries, args.output)
                print(f"wrote {args.output}")
            else:
                print(harness.CSV_HEADER)
                for r in summaries:
                    print(",".join(
                        harness._fmt(v)
                        for v in (r.lam, r.epsilon, r.h, r.N, r.seed, r.error, r.dp_violation,
                                  r.eo_violation, r.sigma_theta_sq, r.sigma_w_sq, r.seconds)
                    ))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
