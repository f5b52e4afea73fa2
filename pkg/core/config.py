"""
Configuration models for clickboost experiments.

Every hyperparameter default lives here as an explicit field so an experiment
YAML file can override any of them.
"""

import hashlib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .exceptions import ConfigError


def derive_seed(root: int, *labels: Any) -> int:
    """
    Derive a 32-bit sub-seed from a root seed and a label path.

    The mixing function is sha256 over "root:label1:label2:..." truncated to
    its first four bytes, read big-endian.

    Args:
        root: Root (global) seed
        labels: Path of labels naming the consumer, e.g. ("model", "gbt")

    Returns:
        Derived seed in [0, 2**32)
    """
    key = ":".join(str(part) for part in (root, *labels))
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


class _Frozen(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ColumnSpec(_Frozen):
    """One column declaration in a user-supplied schema."""
    name: str = Field(min_length=1)
    kind: Literal["numeric", "categorical", "timestamp", "label", "text"]


class EncodingConfig(_Frozen):
    """How raw columns become numeric features."""
    onehot_cap: int = Field(12, ge=1)
    strict: bool = False
    text_mode: Literal["drop", "frequency"] = "drop"
    binary_columns: Tuple[str, ...] = ("Male",)


class SplitSpec(_Frozen):
    """Train/test partition rule. A missing seed is resolved from the global seed."""
    train_fraction: float = Field(0.7, gt=0.0, lt=1.0)
    seed: Optional[int] = None
    shuffle: bool = True


class SynthConfig(_Frozen):
    """Synthetic ad-click generator settings."""
    n_rows: int = Field(1000, ge=2)
    noise_rate: float = Field(0.1, ge=0.0, lt=0.5)
    class_balance: float = Field(0.5, gt=0.0, lt=1.0)


class TreeConfig(_Frozen):
    """Growth limits shared by every tree learner. max_depth None means unbounded."""
    max_depth: Optional[int] = Field(6, ge=0)
    min_samples_leaf: int = Field(5, ge=1)
    min_weight_leaf: float = Field(0.0, ge=0.0)


class ForestConfig(_Frozen):
    n_trees: int = Field(100, ge=1)
    m_try: Optional[int] = Field(None, ge=1)
    tree: TreeConfig = TreeConfig()
    bootstrap: bool = True
    n_jobs: int = Field(1, ge=1)
    seed: int = 0


class GbtConfig(_Frozen):
    n_rounds: int = Field(100, ge=1)
    eta: float = Field(0.1, gt=0.0, le=1.0)
    reg_lambda: float = Field(1.0, ge=0.0)
    gamma: float = Field(0.0, ge=0.0)
    base_score: Optional[float] = None
    tree: TreeConfig = TreeConfig()


class TrainConfig(_Frozen):
    """LSTM trainer settings."""
    hidden_size: int = Field(8, ge=1)
    epochs: int = Field(200, ge=1)
    learning_rate: float = Field(0.05, gt=0.0)
    grad_clip: float = Field(5.0, gt=0.0)
    seed: int = 0
    init_scale: float = Field(0.1, gt=0.0)


class BoostConfig(_Frozen):
    """AdaBoost settings; per-round LSTM configs are derived from `lstm`."""
    n_rounds: int = Field(10, ge=1)
    learner_kind: Literal["lstm", "tree"] = "lstm"
    hidden_sizes: Tuple[int, ...] = (8, 12, 16)
    lstm: TrainConfig = TrainConfig()
    tree: TreeConfig = TreeConfig(max_depth=2)
    epsilon_min: float = Field(1e-10, gt=0.0, lt=0.5)
    target_error: Optional[float] = Field(None, ge=0.0, lt=1.0)
    seed: int = 0
    show_progress: bool = False

    @field_validator("hidden_sizes")
    @classmethod
    def _check_hidden_sizes(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value or any(size < 1 for size in value):
            raise ValueError("hidden_sizes must be a nonempty list of positive integers")
        return value

    def round_train_config(self, round_index: int) -> TrainConfig:
        """
        LSTM config for boosting round `round_index` (0-based).

        Hidden sizes cycle through `hidden_sizes`; each round gets its own seed.
        """
        hidden = self.hidden_sizes[round_index % len(self.hidden_sizes)]
        return self.lstm.model_copy(update={
            "hidden_size": hidden,
            "seed": derive_seed(self.seed, "round", round_index),
        })


ModelKind = Literal["tree", "forest", "gbt", "lstm", "lstm_adaboost"]


class ModelSpec(_Frozen):
    """One model entry of an experiment; params are validated by the learner's config class."""
    name: str = Field(pattern=r"^[A-Za-z0-9_.-]+$")
    kind: ModelKind
    params: Dict[str, Any] = Field(default_factory=dict)


class DatasetSpec(_Frozen):
    """Either a CSV path or a synthetic generator section."""
    path: Optional[Path] = None
    synth: Optional[SynthConfig] = None
    columns: Optional[List[ColumnSpec]] = None

    @model_validator(mode="after")
    def _check_source(self) -> "DatasetSpec":
        if (self.path is None) == (self.synth is None):
            raise ValueError("dataset needs exactly one of 'path' or 'synth'")
        if self.path is not None and not self.path.is_file():
            raise ValueError(f"dataset path does not exist: {self.path}")
        return self


class ExperimentConfig(_Frozen):
    name: str = "experiment"
    dataset: DatasetSpec
    encoding: EncodingConfig = EncodingConfig()
    split: SplitSpec = SplitSpec()
    models: List[ModelSpec] = Field(min_length=1)
    output_dir: Path = Path("./output")
    seed: int = 0

    @field_validator("models")
    @classmethod
    def _unique_names(cls, models: List[ModelSpec]) -> List[ModelSpec]:
        names = [model.name for model in models]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"duplicate model names: {duplicates}")
        return models

    def snapshot(self) -> Dict[str, Any]:
        """JSON-compatible dump of the full config (defaults included)."""
        return self.model_dump(mode="json")

    def data_snapshot(self) -> Dict[str, Any]:
        """The part of the config that determines the prepared train/test data."""
        dump = self.snapshot()
        return {key: dump[key] for key in ("dataset", "encoding", "split", "seed")}


def _resolve_paths(raw: Dict[str, Any], base_dir: Path) -> Dict[str, Any]:
    dataset = raw.get("dataset")
    if isinstance(dataset, dict) and dataset.get("path"):
        path = Path(dataset["path"])
        if not path.is_absolute():
            dataset["path"] = str((base_dir / path).resolve())
    return raw


def parse_experiment_config(raw: Dict[str, Any],
                            seed: Optional[int] = None,
                            output_dir: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """
    Validate a raw config mapping, applying flag overrides.

    Args:
        raw: Parsed YAML/JSON mapping
        seed: --seed override
        output_dir: --out override

    Returns:
        Validated ExperimentConfig
    """
    raw = dict(raw)
    if seed is not None:
        raw["seed"] = seed
    if output_dir is not None:
        raw["output_dir"] = str(output_dir)
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config: {e}") from e


def load_experiment_config(path: Union[str, Path],
                           seed: Optional[int] = None,
                           output_dir: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """
    Load and validate an experiment YAML file.

    Relative dataset paths are resolved against the config file's directory.

    Args:
        path: Config file path
        seed: --seed override
        output_dir: --out override

    Returns:
        Validated ExperimentConfig
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"Config file not found: {config_path}")
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Could not parse {config_path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{config_path} must contain a mapping at top level")

    raw = _resolve_paths(raw, config_path.parent)
    config = parse_experiment_config(raw, seed=seed, output_dir=output_dir)
    logger.info(f"Loaded experiment config '{config.name}' with {len(config.models)} models")
    return config
