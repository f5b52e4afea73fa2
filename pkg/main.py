"""
Main entry point for clickboost.
"""

import argparse
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from loguru import logger

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from core.config import SynthConfig, load_experiment_config
from core.dataset import detect_schema, load_csv
from core.exceptions import ClickBoostError, ConfigError
from core.workflow_orchestrator import (
    WorkflowOrchestrator,
    load_evaluation,
    replay,
    write_comparison,
    write_stats,
    write_synthetic,
)
from tools.io_tools import IOTools
from tools.report_tools import ReportTools


DEFAULT_OUTPUT_DIR = "./output"


def setup_logging(quiet: bool = False):
    """Configure loguru sinks: stderr plus a daily rotating file."""
    load_dotenv()
    level = os.getenv('LOG_LEVEL', 'INFO')
    logger.remove()
    logger.add(sys.stderr, level="WARNING" if quiet else level)

    log_dir = Path(os.getenv('CLICKBOOST_LOG_DIR', './logs'))
    log_dir.mkdir(parents=True, exist_ok=True)
    logger.add(
        log_dir / f"clickboost_{datetime.now().strftime('%Y%m%d')}.log",
        rotation="500 MB",
        retention="10 days",
        level=level
    )


def emit(args, text: str, structured) -> None:
    """Print a result to stdout in the requested format."""
    if args.format == "structured":
        sys.stdout.write(IOTools.canonical_json(structured))
    else:
        sys.stdout.write(text)


def cmd_stats(args) -> int:
    if args.config:
        config = load_experiment_config(args.config, seed=args.seed, output_dir=args.out)
        table = WorkflowOrchestrator(config, command="stats").load_table()
        output_dir = Path(config.output_dir)
    elif args.dataset:
        table = load_csv(args.dataset, detect_schema(args.dataset))
        output_dir = Path(args.out or DEFAULT_OUTPUT_DIR)
    else:
        raise ConfigError("stats needs a dataset path or --config")

    paths = write_stats(table, output_dir)
    emit(args, paths["text"].read_text(encoding="utf-8"), IOTools.read_json(paths["structured"]))
    return 0


def cmd_synth(args) -> int:
    seed = args.seed if args.seed is not None else 0
    settings = {}
    if args.config:
        config = load_experiment_config(args.config, seed=args.seed, output_dir=args.out)
        if config.dataset.synth is None:
            raise ConfigError(f"{args.config} has no dataset.synth section")
        settings = config.dataset.synth.model_dump()
        seed = config.seed
    for key, value in (("n_rows", args.rows), ("noise_rate", args.noise), ("class_balance", args.balance)):
        if value is not None:
            settings[key] = value
    try:
        synth = SynthConfig.model_validate(settings)
    except ValueError as e:
        raise ConfigError(f"Invalid synthetic data settings: {e}") from e

    output = Path(args.output) if args.output else Path(args.out or DEFAULT_OUTPUT_DIR) / "synthetic.csv"
    csv_path, rule_path = write_synthetic(synth, seed, output)
    rule = IOTools.read_json(rule_path)
    emit(args, f"Wrote {synth.n_rows} rows to {csv_path} (Bayes accuracy {rule['bayes_accuracy']})\n", rule)
    return 0


def _workflow(args, command: str) -> WorkflowOrchestrator:
    if not args.config:
        raise ConfigError(f"{command} needs --config")
    config = load_experiment_config(args.config, seed=args.seed, output_dir=args.out)
    return WorkflowOrchestrator(config, command=command)


def cmd_train(args) -> int:
    orchestrator = _workflow(args, "train")
    manifest = orchestrator.execute()
    lines = [f"{name}: {path}" for name, path in orchestrator.model_paths.items()]
    emit(args, "\n".join(lines) + "\n", manifest.to_dict())
    return 0


def cmd_evaluate(args) -> int:
    orchestrator = _workflow(args, "evaluate")
    orchestrator.execute(args.models or None)
    text = "".join(ReportTools.evaluation_table(e) for e in orchestrator.evaluations)
    emit(args, text, [e.to_dict() for e in orchestrator.evaluations])
    return 0


def cmd_compare(args) -> int:
    if len(args.reports) < 2:
        raise ConfigError("compare needs at least two report files")
    evaluations = [load_evaluation(path) for path in args.reports]
    report, _ = write_comparison(evaluations, Path(args.out or DEFAULT_OUTPUT_DIR))
    emit(args, ReportTools.comparison_table(report), report.to_dict())
    return 0


def cmd_run(args) -> int:
    orchestrator = _workflow(args, "run")
    manifest = orchestrator.execute()
    emit(args, ReportTools.comparison_table(orchestrator.comparison), manifest.to_dict())
    return 0


def cmd_replay(args) -> int:
    manifest = replay(args.manifest, args.out)
    emit(args, f"Replay reproduced {len(manifest.artifacts)} artifacts\n", manifest.to_dict())
    return 0


COMMANDS = {
    "stats": cmd_stats,
    "synth": cmd_synth,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "run": cmd_run,
    "replay": cmd_replay,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment YAML file")
    common.add_argument("--seed", type=int, help="Override the global seed")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--format", choices=("text", "structured"), default="text",
                        help="Stdout format")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors to stderr")

    parser = argparse.ArgumentParser(
        prog="clickboost",
        description="Ad-click prediction experiments with AdaBoost over LSTM weak learners"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    stats = sub.add_parser("stats", parents=[common], help="Descriptive statistics of a dataset")
    stats.add_argument("dataset", nargs="?", help="CSV file (or use --config)")

    synth = sub.add_parser("synth", parents=[common], help="Write a synthetic ad-click CSV")
    synth.add_argument("--rows", type=int, help="Number of rows")
    synth.add_argument("--noise", type=float, help="Label flip rate")
    synth.add_argument("--balance", type=float, help="Target positive rate")
    synth.add_argument("--output", help="CSV path (default <out>/synthetic.csv)")

    sub.add_parser("train", parents=[common], help="Train every model of an experiment")

    evaluate = sub.add_parser("evaluate", parents=[common], help="Evaluate trained models")
    evaluate.add_argument("--models", nargs="+", help="Model files (default: the experiment's models)")

    compare = sub.add_parser("compare", parents=[common], help="Compare evaluation reports")
    compare.add_argument("reports", nargs="+", help="Report JSON files")

    sub.add_parser("run", parents=[common], help="Train, evaluate and compare in one go")

    replay_parser = sub.add_parser("replay", parents=[common], help="Rerun an experiment from its manifest")
    replay_parser.add_argument("manifest", help="manifest.json of a previous run")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function."""
    args = build_parser().parse_args(argv)
    setup_logging(args.quiet)

    try:
        return COMMANDS[args.command](args)
    except ClickBoostError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
