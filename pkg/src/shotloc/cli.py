"""Command-line entry points for the localization pipeline."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import PipelineConfig, load_config
from .errors import MissingInput, StageFailed
from .pipeline import Pipeline

COMMAND_STAGES = {
    "ingest": ["audio"],
    "score-audio": ["score"],
    "rerank": ["rerank"],
    "threshold": ["threshold"],
    "flow": ["flow"],
    "detect-smoke": ["smoke"],
    "localize": ["localize"],
    "evaluate": ["eval"],
    "run-all": None,  # every stage
}


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default,
                        help="pipeline config (.json or .toml)")
    parser.add_argument("--run-id", default=default,
                        help="run directory name (default: timestamped)")
    parser.add_argument("--no-review", action="store_true",
                        **({"default": argparse.SUPPRESS} if suppress else {}),
                        help="skip the human-review gate")
    parser.add_argument("--threads", type=int,
                        default=argparse.SUPPRESS if suppress else 1,
                        help="worker threads for per-frame stages")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shotloc",
        description="Gunshot source localization: rank audio, confirm "
                    "segments, find smoke in optical flow, place the muzzle.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    for command in COMMAND_STAGES:
        p = sub.add_parser(command, help=f"run the {command} step")
        _global_flags(p, suppress=True)

    p = sub.add_parser("serve", help="start the review HTTP service")
    _global_flags(p, suppress=True)

    p = sub.add_parser("make-fixture",
                       help="generate the synthetic demo case")
    p.add_argument("directory", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    _global_flags(p, suppress=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)

    if args.command == "make-fixture":
        from .synthcase import build_case
        case = build_case(args.directory, seed=args.seed)
        print(f"fixture written under {case.root}")
        print(f"config: {case.config_path}")
        return 0

    config = load_config(args.config) if args.config else PipelineConfig()

    if args.command == "serve":
        if not args.run_id:
            print("serve requires --run-id of a thresholded run",
                  file=sys.stderr)
            return 2
        from .service import serve_review
        serve_review(config, args.run_id)
        return 0

    pipeline = Pipeline(config, run_id=args.run_id,
                        no_review=args.no_review, threads=args.threads)
    try:
        manifest = pipeline.run(COMMAND_STAGES[args.command])
    except (MissingInput, StageFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"run {manifest.run_id}:")
    for stage, state in manifest.stages.items():
        print(f"  {stage:<10} {state.status}"
              + (f"  ({state.note})" if state.note else ""))
    report = pipeline.run_dir / "report.txt"
    if manifest.is_done("eval") and report.exists():
        print(report.read_text())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
