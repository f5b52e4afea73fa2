"""
Workflow Orchestrator - Runs an experiment stage by stage: data preparation,
training, evaluation, comparison, and the run manifest.
"""

import platform
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from . import __version__
from .config import ExperimentConfig, SynthConfig, derive_seed, parse_experiment_config
from .dataset import (
    FeatureEncoder,
    FeatureMatrix,
    RawTable,
    ScalerParams,
    apply_standardize,
    detect_schema,
    fit_standardize,
    load_csv,
    schema_from_specs,
    split_table,
    summarize,
    synthesize,
    SynthRule,
)
from .evaluation import ComparisonReport, ModelEvaluation, compare, evaluate_predictions
from .exceptions import ConfigError, FingerprintMismatchError
from .serialization import read_model_file, write_model_file
from learners import BaseLearner, create_learner, learner_class
from tools.io_tools import IOTools
from tools.report_tools import ReportTools


PathLike = Union[str, Path]

MANIFEST_NAME = "manifest.json"


class WorkflowStage(Enum):
    """Stages of an experiment run."""
    INITIALIZATION = "initialization"
    DATA_PREPARATION = "data_preparation"
    TRAINING = "training"
    EVALUATION = "evaluation"
    COMPARISON = "comparison"
    COMPLETE = "complete"


@dataclass
class PreparedData:
    """Train/test partitions in raw-encoded and standardized form."""
    table: RawTable
    encoder: FeatureEncoder
    scaler: ScalerParams
    train_raw: FeatureMatrix
    test_raw: FeatureMatrix
    train_scaled: FeatureMatrix
    test_scaled: FeatureMatrix
    split_seed: int
    fingerprints: Dict[str, str]

    def partitions(self, learner: BaseLearner) -> Tuple[FeatureMatrix, FeatureMatrix]:
        if learner.needs_scaling:
            return self.train_scaled, self.test_scaled
        return self.train_raw, self.test_raw


@dataclass
class RunManifest:
    """Everything needed to rerun an experiment and check its outputs."""
    command: str
    config: Dict
    seeds: Dict[str, int]
    artifacts: List[Dict[str, str]] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    versions: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> "RunManifest":
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"Malformed run manifest: {e}") from e


def library_versions() -> Dict[str, str]:
    return {
        "clickboost": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pandas": pd.__version__,
    }


def write_stats(table: RawTable, output_dir: PathLike) -> Dict[str, Path]:
    """
    Summarize a table and write the statistics as text, JSON and CSV.

    Args:
        table: Loaded table
        output_dir: Destination directory

    Returns:
        {"text": path, "structured": path, "delimited": path}
    """
    summary = summarize(table)
    output_dir = Path(output_dir)
    paths = {
        "text": IOTools.atomic_write_text(output_dir / "stats.txt", ReportTools.stats_table(summary)),
        "structured": IOTools.atomic_write_json(
            output_dir / "stats.json", {"n_rows": summary.n_rows, "columns": summary.to_records()}
        ),
        "delimited": IOTools.atomic_write_text(output_dir / "stats.csv", ReportTools.stats_csv(summary)),
    }
    logger.info(f"Statistics for {summary.n_rows} rows written to {output_dir}")
    return paths


def write_synthetic(config: SynthConfig, seed: int, path: PathLike) -> Tuple[Path, Path]:
    """
    Write a synthetic CSV plus a sidecar JSON describing its labelling rule.

    Args:
        config: Generator settings
        seed: Generator seed
        path: CSV destination

    Returns:
        (csv path, sidecar path)
    """
    path = Path(path)
    table = synthesize(config, seed)
    rule = SynthRule.from_config(config)
    sidecar = {"seed": seed, "n_rows": config.n_rows, **rule.describe()}
    try:
        csv_path = IOTools.atomic_write_text(path, table.to_csv_text())
        rule_path = IOTools.atomic_write_json(path.with_suffix(".rule.json"), sidecar)
    except OSError as e:
        raise ConfigError(f"Cannot write synthetic data to {path}: {e}") from e
    logger.info(f"Synthetic dataset written to {csv_path} (Bayes accuracy {rule.bayes_accuracy:.3f})")
    return csv_path, rule_path


def load_evaluation(path: PathLike) -> ModelEvaluation:
    try:
        return ModelEvaluation.from_dict(IOTools.read_json(path))
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"Could not read report {path}: {e}") from e


def write_comparison(evaluations: Sequence[ModelEvaluation], output_dir: PathLike) -> Tuple[ComparisonReport, List[Path]]:
    """
    Compare models and write the table, the structured report and the chart data.

    Args:
        evaluations: Per-model train/test reports
        output_dir: Destination directory

    Returns:
        (ComparisonReport, written paths)
    """
    report = compare(evaluations)
    output_dir = Path(output_dir)
    paths = [
        IOTools.atomic_write_json(output_dir / "comparison.json", report.to_dict()),
        IOTools.atomic_write_text(output_dir / "comparison.txt", ReportTools.comparison_table(report)),
        IOTools.atomic_write_text(output_dir / "chart_data.csv", ReportTools.chart_data_csv(report)),
    ]
    logger.info(f"Comparison of {len(report.rows)} models written to {output_dir}")
    return report, paths


class WorkflowOrchestrator:
    """Orchestrates one experiment from its config."""

    def __init__(self, config: ExperimentConfig, command: str = "run"):
        """
        Initialize workflow orchestrator.

        Args:
            config: Validated experiment config
            command: CLI command being executed (recorded in the manifest)
        """
        self.config = config
        self.command = command
        self.output_dir = Path(config.output_dir)
        self.models_dir = self.output_dir / "models"
        self.reports_dir = self.output_dir / "reports"

        self.workflow_state = {
            'current_stage': WorkflowStage.INITIALIZATION.value,
            'completed_stages': [],
            'timings': {},
            'status': 'in_progress'
        }
        self._stage_started = time.perf_counter()

        self.data: Optional[PreparedData] = None
        self.seeds: Dict[str, int] = {"global": config.seed}
        self.model_paths: Dict[str, Path] = {}
        self.evaluations: List[ModelEvaluation] = []
        self.comparison: Optional[ComparisonReport] = None
        self.artifacts: List[Path] = []

        logger.info(f"Workflow orchestrator initialized for experiment: {config.name}")

    def update_stage(self, stage: WorkflowStage):
        """Update current workflow stage."""
        self.workflow_state['current_stage'] = stage.value
        self._stage_started = time.perf_counter()
        logger.info("=" * 60)
        logger.info(f"STAGE: {stage.value}")
        logger.info("=" * 60)

    def complete_stage(self, stage: WorkflowStage):
        """Mark a stage as complete and record its wall-clock time."""
        elapsed = time.perf_counter() - self._stage_started
        self.workflow_state['completed_stages'].append(stage.value)
        self.workflow_state['timings'][stage.value] = round(elapsed, 6)
        logger.info(f"Stage complete: {stage.value} ({elapsed:.2f}s)")

    def _record(self, path: Path) -> Path:
        self.artifacts.append(path)
        return path

    def load_table(self) -> RawTable:
        dataset = self.config.dataset
        if dataset.synth is not None:
            seed = derive_seed(self.config.seed, "synth")
            self.seeds["synth"] = seed
            return synthesize(dataset.synth, seed)
        schema = schema_from_specs(dataset.columns) if dataset.columns else detect_schema(dataset.path)
        return load_csv(dataset.path, schema)

    def prepare_data(self) -> PreparedData:
        """
        Load, split, encode and standardize.

        The encoder and the scaler are fitted on the training rows only.

        Returns:
            PreparedData
        """
        self.update_stage(WorkflowStage.DATA_PREPARATION)
        table = self.load_table()

        split_seed = self.config.split.seed
        if split_seed is None:
            split_seed = derive_seed(self.config.seed, "split")
        self.seeds["split"] = split_seed
        spec = self.config.split.model_copy(update={"seed": split_seed})
        train_table, test_table = split_table(table, spec)

        encoder = FeatureEncoder(self.config.encoding).fit(train_table)
        train_raw = encoder.transform(train_table)
        test_raw = encoder.transform(test_table)
        train_scaled, scaler = fit_standardize(train_raw)
        test_scaled = apply_standardize(test_raw, scaler)

        fingerprints = {
            "config": IOTools.fingerprint(self.config.data_snapshot()),
            "scaler": scaler.fingerprint(),
            "split": IOTools.fingerprint({"n_rows": table.n_rows, "rule": spec.model_dump(mode="json")}),
        }
        self.data = PreparedData(
            table=table, encoder=encoder, scaler=scaler,
            train_raw=train_raw, test_raw=test_raw,
            train_scaled=train_scaled, test_scaled=test_scaled,
            split_seed=split_seed, fingerprints=fingerprints,
        )
        logger.info(
            f"Prepared {train_table.n_rows} train / {test_table.n_rows} test rows, "
            f"{train_raw.n_features} features: {list(train_raw.feature_names)}"
        )
        if test_raw.n_unknown:
            logger.warning(f"{test_raw.n_unknown} unknown categories in the test partition were zero-encoded")
        self.complete_stage(WorkflowStage.DATA_PREPARATION)
        return self.data

    def _require_data(self) -> PreparedData:
        return self.data if self.data is not None else self.prepare_data()

    def train_models(self) -> Dict[str, Path]:
        """
        Train every listed model and save one model file each.

        Returns:
            Model name -> model file path
        """
        data = self._require_data()
        self.update_stage(WorkflowStage.TRAINING)
        for spec in self.config.models:
            learner = create_learner(spec, self.config.seed)
            self.seeds[f"model:{spec.name}"] = learner.seed
            train, _ = data.partitions(learner)
            learner.fit(train)
            envelope = {
                "name": spec.name,
                "kind": spec.kind,
                "params": spec.params,
                "fingerprints": data.fingerprints,
                "seeds": {"global": self.config.seed, "split": data.split_seed, "model": learner.seed},
                "summary": learner.describe(),
                "model": learner.to_payload(),
            }
            path = write_model_file(self.models_dir / f"{spec.name}.json", envelope)
            self.model_paths[spec.name] = self._record(path)
        self.complete_stage(WorkflowStage.TRAINING)
        return self.model_paths

    def _load_learner(self, path: Path, data: PreparedData) -> BaseLearner:
        envelope = read_model_file(path)
        name = envelope.get("name", path.stem)
        stored = envelope.get("fingerprints", {})
        differing = sorted(key for key in data.fingerprints if stored.get(key) != data.fingerprints[key])
        if differing:
            raise FingerprintMismatchError(
                f"Model '{name}' ({path}) was trained under different preprocessing "
                f"(mismatched fingerprints: {differing})"
            )
        return learner_class(envelope["kind"]).from_payload(
            name, envelope["model"], envelope.get("params"), self.config.seed
        )

    def evaluate_models(self, model_paths: Optional[Sequence[PathLike]] = None) -> List[ModelEvaluation]:
        """
        Evaluate model files on both partitions and write their reports.

        Args:
            model_paths: Model files (defaults to the experiment's models directory)

        Returns:
            One ModelEvaluation per model file
        """
        data = self._require_data()
        self.update_stage(WorkflowStage.EVALUATION)
        if model_paths is None:
            model_paths = [self.models_dir / f"{spec.name}.json" for spec in self.config.models]

        self.evaluations = []
        for path in map(Path, model_paths):
            learner = self._load_learner(path, data)
            train, test = data.partitions(learner)
            evaluation = ModelEvaluation(
                name=learner.name,
                train=evaluate_predictions(learner.predict(train)[0], train.labels),
                test=evaluate_predictions(learner.predict(test)[0], test.labels),
                kind=learner.kind,
            )
            self.evaluations.append(evaluation)
            self._record(IOTools.atomic_write_json(self.reports_dir / f"{learner.name}.json", evaluation.to_dict()))
            self._record(IOTools.atomic_write_text(self.reports_dir / f"{learner.name}.txt",
                                                   ReportTools.evaluation_table(evaluation)))
            logger.info(
                f"{learner.name}: train accuracy {evaluation.train.accuracy:.4f}, "
                f"test accuracy {evaluation.test.accuracy:.4f}"
            )
        self.complete_stage(WorkflowStage.EVALUATION)
        return self.evaluations

    def compare_models(self) -> ComparisonReport:
        self.update_stage(WorkflowStage.COMPARISON)
        self.comparison, paths = write_comparison(self.evaluations, self.reports_dir)
        self.artifacts.extend(paths)
        self.complete_stage(WorkflowStage.COMPARISON)
        return self.comparison

    def build_manifest(self) -> RunManifest:
        artifacts = [
            {
                "path": path.relative_to(self.output_dir).as_posix(),
                "sha256": IOTools.sha256_file(path),
            }
            for path in sorted(set(self.artifacts))
        ]
        return RunManifest(
            command=self.command,
            config=self.config.snapshot(),
            seeds=dict(sorted(self.seeds.items())),
            artifacts=artifacts,
            timings=dict(self.workflow_state['timings']),
            versions=library_versions(),
        )

    def finalize_workflow(self) -> RunManifest:
        """Write the run manifest atomically and close the workflow."""
        self.workflow_state['status'] = 'completed'
        self.workflow_state['current_stage'] = WorkflowStage.COMPLETE.value
        manifest = self.build_manifest()
        path = IOTools.atomic_write_json(self.output_dir / MANIFEST_NAME, manifest.to_dict())
        logger.info(f"Run manifest saved to {path}")
        return manifest

    def execute(self, model_paths: Optional[Sequence[PathLike]] = None) -> RunManifest:
        """
        Run the stages of `self.command`.

        Args:
            model_paths: Model files for the evaluate command

        Returns:
            The written RunManifest
        """
        if self.command not in ("train", "evaluate", "run"):
            raise ConfigError(f"Command '{self.command}' does not run an experiment workflow")
        self.prepare_data()
        if self.command in ("train", "run"):
            self.train_models()
        if self.command in ("evaluate", "run"):
            self.evaluate_models(model_paths)
        if self.command == "run":
            self.compare_models()
        return self.finalize_workflow()


def replay(manifest_path: PathLike, output_dir: Optional[PathLike] = None) -> RunManifest:
    """
    Rerun the experiment recorded in a manifest and check every artifact hash.

    Args:
        manifest_path: manifest.json of the original run
        output_dir: Where to write the replay (defaults to <original output>/replay)

    Returns:
        Manifest of the replayed run
    """
    manifest_path = Path(manifest_path)
    try:
        original = RunManifest.from_dict(IOTools.read_json(manifest_path))
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"Could not read manifest {manifest_path}: {e}") from e

    target = Path(output_dir) if output_dir is not None else manifest_path.parent / "replay"
    config = parse_experiment_config(original.config, output_dir=target)
    logger.info(f"Replaying '{original.command}' of experiment '{config.name}' into {target}")

    orchestrator = WorkflowOrchestrator(config, command=original.command)
    model_paths = None
    if original.command == "evaluate":
        model_paths = [
            manifest_path.parent / "models" / f"{spec.name}.json" for spec in config.models
        ]
    replayed = orchestrator.execute(model_paths)

    expected = {a["path"]: a["sha256"] for a in original.artifacts}
    actual = {a["path"]: a["sha256"] for a in replayed.artifacts}
    differing = sorted(path for path in expected if actual.get(path) != expected[path])
    if differing:
        raise FingerprintMismatchError(f"Replay produced different artifacts: {differing}")
    logger.info(f"Replay reproduced all {len(expected)} artifacts")
    return replayed
