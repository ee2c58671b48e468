"""Command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys

from .pipeline import STAGES, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxoforge",
        description="Build, clean, rank, merge, and evaluate domain taxonomies from a seed list.",
    )
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument(
        "--stages",
        help=f"comma-separated subset of {','.join(STAGES)} (default: all configured)",
    )
    parser.add_argument(
        "--offline",
        action="store_true",
        default=None,
        help="forbid network use; caches and recordings must already cover the run",
    )
    parser.add_argument("--workers", type=int, help="parallel sweep points")
    parser.add_argument("--run-dir", help="override the run directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    stages = [s.strip() for s in args.stages.split(",") if s.strip()] if args.stages else None
    try:
        return run_pipeline(
            args.config,
            stages=stages,
            offline=args.offline,
            workers=args.workers,
            run_dir=args.run_dir,
        )
    except Exception as exc:  # stage failure: artifacts so far stay on disk
        logging.getLogger(__name__).error("run failed: %s", exc)
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
