#!/usr/bin/env python3
"""
Command-line entry point for the BIP impact pipeline.

Usage:
    bip-impact run --config pipeline.yaml [--output-dir reports] [--max-lag 6]
    bip-impact clean --config pipeline.yaml --level 0.1
    bip-impact report reports/
    bip-impact fixture /tmp/bip-fixture --seed 7
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .core.config import load_config, settings
from .core.errors import BipImpactError, ConfigurationError, PipelineStageError
from .core.pipeline import Pipeline, audit
from .schemas.pipeline import PipelineConfig
from .utils.synthetic import write_fixture

logger = logging.getLogger(__name__)

# Subcommand -> stages it asks for; prerequisites are added by the pipeline
SUBCOMMAND_STAGES = {
    "transform": ["transform"],
    "cointegrate": ["cointegrate"],
    "clean": ["clean"],
    "causality": ["causality"],
    "run": ["cointegrate", "causality"],
}


def _add_pipeline_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", "-c", type=Path, required=True, help="Pipeline YAML file")
    parser.add_argument("--output-dir", "-o", type=Path, help="Overrides output_dir from the config")
    parser.add_argument(
        "--max-lag",
        type=int,
        help="Run the causality matrices at this maximum lag only (e.g. 6, 10 or 12)",
    )
    parser.add_argument("--level", type=float, help="Significance level of regression filtering")
    parser.add_argument("--t-level", type=float, help="Significance level of the X-lag t-tests")
    parser.add_argument("--f-level", type=float, help="Significance level of the Granger F-test")
    parser.add_argument(
        "--skip-cointegration",
        action="store_true",
        help="Do not run the cointegration screen (downstream results are unchanged)",
    )
    parser.add_argument("--workers", type=int, help="Worker pool size (default: BIP_IMPACT_WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bip-impact",
        description="Measure the impact of Bitcoin Improvement Proposals on the wealth distribution",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    helps = {
        "transform": "Ingest and transform every series to monthly increments",
        "cointegrate": "Engle-Granger screen of every feature against every bucket",
        "clean": "Global regressions, significance filtering and cleaned buckets",
        "causality": "Event signals and Granger causality matrices",
        "run": "The full pipeline",
    }
    for name, text in helps.items():
        _add_pipeline_arguments(subparsers.add_parser(name, help=text))

    report = subparsers.add_parser("report", help="Audit stored tables against stored intermediates")
    report.add_argument("output_dir", type=Path, help="Directory written by a previous run")

    fixture = subparsers.add_parser("fixture", help="Write the seeded synthetic dataset and its config")
    fixture.add_argument("directory", type=Path)
    fixture.add_argument("--seed", type=int, default=7)
    fixture.add_argument("--registry", type=Path, help="BIP registry CSV (default: bundled)")
    return parser


def apply_overrides(config: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    """Command-line flags take precedence over the config file"""
    update = {}
    if args.output_dir is not None:
        update["output_dir"] = str(args.output_dir.resolve())
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigurationError("--workers must be >= 1")
        update["workers"] = args.workers
    if args.level is not None:
        update["regression"] = config.regression.model_copy(update={"level": args.level})

    granger = {}
    if args.max_lag is not None:
        if args.max_lag < 1:
            raise ConfigurationError("--max-lag must be >= 1")
        granger["max_lags"] = [args.max_lag]
    if args.t_level is not None:
        granger["t_level"] = args.t_level
    if args.f_level is not None:
        granger["f_level"] = args.f_level
    if granger:
        update["granger"] = config.granger.model_copy(update=granger)

    for name in ("level", "t_level", "f_level"):
        value = getattr(args, name)
        if value is not None and not 0.0 < value < 1.0:
            raise ConfigurationError(f"--{name.replace('_', '-')} must lie in (0, 1), got {value}")
    return config.model_copy(update=update) if update else config


def _run_pipeline(args: argparse.Namespace) -> int:
    config = apply_overrides(load_config(args.config), args)
    pipeline = Pipeline(config)
    report = pipeline.run(SUBCOMMAND_STAGES[args.command], skip_cointegration=args.skip_cointegration)
    print(f"Completed stages: {', '.join(pipeline.completed)}")
    print(f"  Artifacts: {len(report.artifacts)} files")
    print(f"  Output directory: {pipeline.storage.root}")
    return 0


def _report(args: argparse.Namespace) -> int:
    if not args.output_dir.is_dir():
        raise ConfigurationError(f"output directory '{args.output_dir}' does not exist")
    result = audit(str(args.output_dir))
    print(f"Audit complete: {result.checked} checks, {len(result.mismatches)} mismatches")
    for mismatch in result.mismatches:
        print(f"  {mismatch}")
    return 0 if result.ok else 1


def _fixture(args: argparse.Namespace) -> int:
    config_path = write_fixture(args.directory, seed=args.seed, registry_path=args.registry)
    print(f"Fixture written; run it with: bip-impact run --config {config_path}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.LOG_LEVEL.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        if args.command == "report":
            return _report(args)
        if args.command == "fixture":
            return _fixture(args)
        return _run_pipeline(args)
    except ConfigurationError as e:
        print(f"[config] {e}", file=sys.stderr)
        return 2
    except PipelineStageError as e:
        print(str(e), file=sys.stderr)
        return 1
    except BipImpactError as e:
        print(f"[{args.command}] {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
