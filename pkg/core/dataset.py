"""
Ad-click dataset handling: CSV ingestion, descriptive statistics, feature
encoding, standardization, the 7:3 split and a synthetic generator with a
known labelling rule.
"""

import functools
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from .config import ColumnSpec, EncodingConfig, SplitSpec, SynthConfig
from .exceptions import DatasetError
from tools.io_tools import IOTools


class ColumnKind(Enum):
    """How a raw column is parsed and encoded."""
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    TIMESTAMP = "timestamp"
    LABEL = "label"
    TEXT = "text"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: ColumnKind

    @classmethod
    def from_spec(cls, spec: ColumnSpec) -> "ColumnSchema":
        return cls(spec.name, ColumnKind(spec.kind))


Schema = Tuple[ColumnSchema, ...]

DEFAULT_SCHEMA: Schema = (
    ColumnSchema("Daily Time Spent on Site", ColumnKind.NUMERIC),
    ColumnSchema("Age", ColumnKind.NUMERIC),
    ColumnSchema("Area Income", ColumnKind.NUMERIC),
    ColumnSchema("Daily Internet Usage", ColumnKind.NUMERIC),
    ColumnSchema("Ad Topic Line", ColumnKind.TEXT),
    ColumnSchema("City", ColumnKind.CATEGORICAL),
    ColumnSchema("Male", ColumnKind.CATEGORICAL),
    ColumnSchema("Country", ColumnKind.CATEGORICAL),
    ColumnSchema("Timestamp", ColumnKind.TIMESTAMP),
    ColumnSchema("Clicked on Ad", ColumnKind.LABEL),
)

# The excerpt printed as the selected-data table: four numeric columns plus the label.
NUMERIC_SCHEMA: Schema = tuple(
    column for column in DEFAULT_SCHEMA
    if column.kind in (ColumnKind.NUMERIC, ColumnKind.LABEL)
)

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"
WEIGHT_SUM_TOL = 1e-9


def validate_schema(schema: Sequence[ColumnSchema]) -> Schema:
    """
    Check column-name uniqueness and the single-label rule.

    Args:
        schema: Column declarations

    Returns:
        The schema as a tuple
    """
    schema = tuple(schema)
    names = [column.name for column in schema]
    if len(set(names)) != len(names):
        duplicates = sorted({name for name in names if names.count(name) > 1})
        raise DatasetError(f"Duplicate column names in schema: {duplicates}")
    labels = [column.name for column in schema if column.kind is ColumnKind.LABEL]
    if len(labels) != 1:
        raise DatasetError(f"Schema must have exactly one label column, found {len(labels)}: {labels}")
    return schema


def schema_from_specs(specs: Optional[Sequence[ColumnSpec]]) -> Schema:
    if not specs:
        return DEFAULT_SCHEMA
    return validate_schema(ColumnSchema.from_spec(spec) for spec in specs)


@dataclass(frozen=True)
class RawTable:
    """
    Parsed rows, one typed pandas column per schema entry.

    Numeric columns are float64, the label int64, timestamps datetime64 and
    categorical/text columns Python strings.
    """
    schema: Schema
    frame: pd.DataFrame

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    @property
    def label_column(self) -> str:
        return next(column.name for column in self.schema if column.kind is ColumnKind.LABEL)

    @property
    def labels(self) -> np.ndarray:
        return self.frame[self.label_column].to_numpy(dtype=np.int64)

    def columns_of(self, *kinds: ColumnKind) -> List[str]:
        return [column.name for column in self.schema if column.kind in kinds]

    def take(self, indices: np.ndarray) -> "RawTable":
        return RawTable(self.schema, self.frame.iloc[np.asarray(indices)].reset_index(drop=True))

    def to_csv_text(self) -> str:
        """
        Render the table as CSV text in the schema's column order.

        Integral floats are written without a decimal part and other floats
        with their shortest round-trip repr, so reloading is exact.
        """
        out = pd.DataFrame(index=self.frame.index)
        for column in self.schema:
            values = self.frame[column.name]
            if column.kind is ColumnKind.NUMERIC:
                out[column.name] = [_format_number(v) for v in values]
            elif column.kind is ColumnKind.LABEL:
                out[column.name] = values.astype(np.int64).astype(str)
            elif column.kind is ColumnKind.TIMESTAMP:
                out[column.name] = values.dt.strftime(TIMESTAMP_FORMAT)
            else:
                out[column.name] = values.astype(str)
        buffer = io.StringIO()
        out.to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue()


def _format_number(value: float) -> str:
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def _bad_cell(path: Path, row: int, column: str, value: str, reason: str) -> DatasetError:
    return DatasetError(
        f"{reason} {value!r} in {path.name} at row {row + 1} (line {row + 2}), column '{column}'"
    )


def detect_schema(path: Union[str, Path]) -> Schema:
    """Built-in schema whose column names equal the file's header; DEFAULT_SCHEMA otherwise."""
    try:
        header = [str(name) for name in pd.read_csv(path, nrows=0, encoding="utf-8").columns]
    except (OSError, ValueError, pd.errors.EmptyDataError, pd.errors.ParserError):
        return DEFAULT_SCHEMA
    for schema in (DEFAULT_SCHEMA, NUMERIC_SCHEMA):
        if header == [column.name for column in schema]:
            return schema
    return DEFAULT_SCHEMA


def load_csv(path: Union[str, Path], schema: Sequence[ColumnSchema] = DEFAULT_SCHEMA) -> RawTable:
    """
    Load an ad-click CSV file and parse every cell according to the schema.

    Args:
        path: CSV file (UTF-8, comma separated, header row first)
        schema: Expected columns, in file order

    Returns:
        Parsed RawTable
    """
    path = Path(path)
    schema = validate_schema(schema)
    if not path.is_file():
        raise DatasetError(f"Dataset file not found: {path}")

    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise DatasetError(f"{path.name} has no header row") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DatasetError(f"{path.name} is not a well-formed UTF-8 CSV file: {e}") from e

    expected = [column.name for column in schema]
    found = [str(name) for name in raw.columns]
    if found != expected:
        raise DatasetError(f"Header mismatch in {path.name}: expected {expected}, found {found}")

    parsed = {}
    for column in schema:
        cells = raw[column.name]
        missing = cells.isna() | (cells.fillna("").str.strip() == "")
        if missing.any():
            row = int(np.flatnonzero(missing.to_numpy())[0])
            raise _bad_cell(path, row, column.name, "", "Empty cell")
        cells = cells.str.strip()

        if column.kind in (ColumnKind.NUMERIC, ColumnKind.LABEL):
            values = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
            bad = ~np.isfinite(values)
            if bad.any():
                row = int(np.flatnonzero(bad)[0])
                raise _bad_cell(path, row, column.name, cells.iloc[row], "Unparsable value")
            if column.kind is ColumnKind.LABEL:
                outside = (values != 0.0) & (values != 1.0)
                if outside.any():
                    row = int(np.flatnonzero(outside)[0])
                    raise _bad_cell(path, row, column.name, cells.iloc[row], "Label outside {0, 1}:")
                parsed[column.name] = values.astype(np.int64)
            else:
                parsed[column.name] = values
        elif column.kind is ColumnKind.TIMESTAMP:
            stamps = pd.to_datetime(cells, errors="coerce", format="ISO8601")
            bad = stamps.isna().to_numpy()
            if bad.any():
                row = int(np.flatnonzero(bad)[0])
                raise _bad_cell(path, row, column.name, cells.iloc[row], "Unparsable timestamp")
            parsed[column.name] = stamps
        else:
            parsed[column.name] = cells.astype(object)

    frame = pd.DataFrame(parsed, columns=expected)
    logger.info(f"Loaded {len(frame)} rows x {len(expected)} columns from {path}")
    return RawTable(schema, frame)


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnStats:
    maximum: float
    minimum: float
    mean: float
    median: float
    variance: float  # population variance

    def to_record(self, name: str) -> Dict[str, Union[str, float]]:
        return {
            "name": name,
            "max": self.maximum,
            "min": self.minimum,
            "mean": self.mean,
            "median": self.median,
            "variance": self.variance,
        }


@dataclass(frozen=True)
class StatsSummary:
    """Per-column statistics, in schema order."""
    columns: Dict[str, ColumnStats]
    n_rows: int

    def to_records(self) -> List[Dict[str, Union[str, float]]]:
        return [stats.to_record(name) for name, stats in self.columns.items()]


def column_stats(values: np.ndarray) -> ColumnStats:
    """
    Exact statistics of one column.

    Values are sorted and summed with math.fsum, so the result does not
    depend on row order.
    """
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    n = len(ordered)
    mean = math.fsum(ordered) / n
    mean = min(max(mean, ordered[0]), ordered[-1])
    variance = math.fsum((ordered - mean) ** 2) / n
    return ColumnStats(
        maximum=float(ordered[-1]),
        minimum=float(ordered[0]),
        mean=float(mean),
        median=float(np.median(ordered)),
        variance=float(variance),
    )


def summarize(table: RawTable) -> StatsSummary:
    """
    Max, min, mean, median and population variance of every numeric column
    (the label column included).

    Args:
        table: Loaded table with at least one row

    Returns:
        StatsSummary
    """
    if table.n_rows == 0:
        raise DatasetError("Cannot summarize: the table has no rows")
    names = table.columns_of(ColumnKind.NUMERIC, ColumnKind.LABEL)
    if not table.columns_of(ColumnKind.NUMERIC):
        raise DatasetError("Cannot summarize: the table has no numeric columns")

    columns = {}
    for name in names:
        values = table.frame[name].to_numpy(dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise DatasetError(f"Non-finite value in column '{name}'")
        columns[name] = column_stats(values)
    return StatsSummary(columns=columns, n_rows=table.n_rows)


# ---------------------------------------------------------------------------
# Feature matrices and standardization
# ---------------------------------------------------------------------------


def _frozen_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature z-score parameters (scale > 0)."""
    center: np.ndarray
    scale: np.ndarray
    feature_names: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen_array(self.center, np.float64))
        object.__setattr__(self, "scale", _frozen_array(self.scale, np.float64))
        if self.center.shape != self.scale.shape or self.center.shape != (len(self.feature_names),):
            raise ValueError("center, scale and feature_names must have one entry per feature")
        if not np.all(self.scale > 0):
            raise ValueError("scale entries must be positive")

    def to_payload(self) -> Dict:
        return {
            "center": self.center.tolist(),
            "scale": self.scale.tolist(),
            "feature_names": list(self.feature_names),
        }

    def fingerprint(self) -> str:
        return IOTools.fingerprint(self.to_payload())


@dataclass(frozen=True)
class FeatureMatrix:
    """
    Encoded N x F design matrix with binary labels.

    Arrays are copied and made read-only on construction.
    """
    values: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...]
    scaler: Optional[ScalerParams] = None
    n_unknown: int = 0

    def __post_init__(self):
        values = _frozen_array(self.values, np.float64)
        labels = _frozen_array(self.labels, np.int64)
        names = tuple(self.feature_names)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        if labels.shape != (values.shape[0],):
            raise ValueError(f"{values.shape[0]} rows but {labels.shape[0]} labels")
        if values.shape[1] != len(names):
            raise ValueError(f"{values.shape[1]} features but {len(names)} feature names")
        if not np.all(np.isfinite(values)):
            raise DatasetError("Feature matrix contains non-finite entries")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def take(self, indices: np.ndarray) -> "FeatureMatrix":
        indices = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(self.values[indices], self.labels[indices],
                             self.feature_names, self.scaler, self.n_unknown)

    def scaler_fingerprint(self) -> Optional[str]:
        return self.scaler.fingerprint() if self.scaler is not None else None


def check_weights(weights: np.ndarray, n: int, normalized: bool = True) -> np.ndarray:
    """
    Validate a per-row sample weight vector.

    Args:
        weights: Candidate weights
        n: Number of rows they must align with
        normalized: Require a sum of 1 (within 1e-9) instead of any positive total

    Returns:
        The weights as a float64 array
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (n,):
        raise ValueError(f"{weights.size} weights for {n} rows")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite and nonnegative")
    total = weights.sum()
    if normalized and abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights must sum to 1, got {total!r}")
    if not total > 0:
        raise ValueError("weights must have positive total mass")
    return weights


def fit_standardize(matrix: FeatureMatrix) -> Tuple[FeatureMatrix, ScalerParams]:
    """
    Fit a z-score scaler on the matrix and apply it.

    Constant features get scale 1 and are centered on their value.

    Args:
        matrix: Training-partition matrix

    Returns:
        (standardized matrix, fitted ScalerParams)
    """
    if matrix.n_samples == 0:
        raise DatasetError("Cannot fit a scaler on an empty matrix")
    values = matrix.values
    center = values.mean(axis=0)
    std = np.sqrt(((values - center) ** 2).mean(axis=0))
    constant = values.max(axis=0) == values.min(axis=0)
    center = np.where(constant, values[0], center)
    scale = np.where(constant | ~(std > 0), 1.0, std)
    params = ScalerParams(center, scale, matrix.feature_names)
    logger.debug(f"Fitted scaler on {matrix.n_samples} rows, {int(constant.sum())} constant features")
    return apply_standardize(matrix, params), params


def apply_standardize(matrix: FeatureMatrix, params: ScalerParams) -> FeatureMatrix:
    """
    Apply stored scaler parameters verbatim.

    Args:
        matrix: Matrix with the scaler's feature layout
        params: Fitted ScalerParams

    Returns:
        Standardized matrix carrying `params`
    """
    if matrix.feature_names != params.feature_names:
        raise ValueError(
            f"Scaler was fitted on features {list(params.feature_names)}, "
            f"matrix has {list(matrix.feature_names)}"
        )
    if not np.all(np.isfinite(matrix.values)):
        raise DatasetError("Cannot standardize non-finite input")
    scaled = (matrix.values - params.center) / params.scale
    return FeatureMatrix(scaled, matrix.labels, matrix.feature_names, params, matrix.n_unknown)


# ---------------------------------------------------------------------------
# Train/test split
# ---------------------------------------------------------------------------


def split_sizes(n: int, train_fraction: float) -> Tuple[int, int]:
    """Round-half-up train size and its remainder."""
    n_train = int(math.floor(n * train_fraction + 0.5))
    return n_train, n - n_train


def split_indices(n: int, spec: SplitSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seeded disjoint train/test index sets covering range(n).

    Args:
        n: Number of rows (>= 2)
        spec: Split rule

    Returns:
        (train indices, test indices)
    """
    if n < 2:
        raise DatasetError(f"Cannot split {n} rows; need at least 2")
    n_train, n_test = split_sizes(n, spec.train_fraction)
    if n_train == 0 or n_test == 0:
        raise DatasetError(
            f"train_fraction {spec.train_fraction} on {n} rows leaves an empty partition "
            f"({n_train} train / {n_test} test)"
        )
    seed = spec.seed if spec.seed is not None else 0
    order = np.random.default_rng(seed).permutation(n) if spec.shuffle else np.arange(n)
    return order[:n_train], order[n_train:]


def split(matrix: FeatureMatrix, spec: SplitSpec) -> Tuple[FeatureMatrix, FeatureMatrix]:
    """Split a feature matrix into (train, test)."""
    train_idx, test_idx = split_indices(matrix.n_samples, spec)
    return matrix.take(train_idx), matrix.take(test_idx)


def split_table(table: RawTable, spec: SplitSpec) -> Tuple[RawTable, RawTable]:
    """Split raw rows with the same index rule as `split`."""
    train_idx, test_idx = split_indices(table.n_rows, spec)
    return table.take(train_idx), table.take(test_idx)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


@dataclass
class _FittedColumn:
    name: str
    mode: str  # numeric | binary | onehot | frequency | timestamp
    categories: Tuple[str, ...] = ()
    frequencies: Dict[str, float] = field(default_factory=dict)
    positive: Optional[str] = None

    def feature_names(self) -> List[str]:
        if self.mode in ("numeric", "binary"):
            return [self.name]
        if self.mode == "onehot":
            return [f"{self.name}={category}" for category in self.categories]
        if self.mode == "frequency":
            return [f"{self.name}_freq"]
        return [f"{self.name}_hour", f"{self.name}_weekday"]


class FeatureEncoder:
    """
    Turns a RawTable into a FeatureMatrix.

    Vocabularies and frequencies are learned by `fit` (training rows only) and
    reused verbatim by `transform`.
    """

    def __init__(self, config: Optional[EncodingConfig] = None):
        """
        Initialize the encoder.

        Args:
            config: Encoding options (defaults apply when omitted)
        """
        self.config = config or EncodingConfig()
        self.columns: List[_FittedColumn] = []
        self.schema: Optional[Schema] = None

    @property
    def feature_names(self) -> Tuple[str, ...]:
        return tuple(name for column in self.columns for name in column.feature_names())

    def fit(self, table: RawTable) -> "FeatureEncoder":
        """
        Learn per-column encodings.

        Args:
            table: Training rows

        Returns:
            self
        """
        if table.n_rows == 0:
            raise DatasetError("Cannot fit an encoder on a table with no rows")
        self.schema = table.schema
        self.columns = []
        for column in table.schema:
            fitted = self._fit_column(column, table.frame[column.name])
            if fitted is not None:
                self.columns.append(fitted)
        logger.debug(f"Encoder fitted: {len(self.feature_names)} features from {len(table.schema)} columns")
        return self

    def _fit_column(self, column: ColumnSchema, values: pd.Series) -> Optional[_FittedColumn]:
        if column.kind is ColumnKind.LABEL:
            return None
        if column.kind is ColumnKind.NUMERIC:
            return _FittedColumn(column.name, "numeric")
        if column.kind is ColumnKind.TIMESTAMP:
            return _FittedColumn(column.name, "timestamp")
        if column.kind is ColumnKind.TEXT and self.config.text_mode == "drop":
            return None

        counts = values.astype(str).value_counts()
        categories = tuple(sorted(counts.index))
        frequencies = {key: float(count) / len(values) for key, count in counts.items()}

        if column.kind is ColumnKind.CATEGORICAL and column.name in self.config.binary_columns:
            if set(categories) <= {"0", "1"}:
                return _FittedColumn(column.name, "binary", categories=("0", "1"), positive="1")
            if len(categories) > 2:
                raise DatasetError(
                    f"Binary column '{column.name}' has {len(categories)} categories: {list(categories)[:5]}..."
                )
            positive = categories[-1] if len(categories) == 2 else None
            return _FittedColumn(column.name, "binary", categories=categories, positive=positive)

        if column.kind is ColumnKind.CATEGORICAL and len(categories) <= self.config.onehot_cap:
            return _FittedColumn(column.name, "onehot", categories=categories)
        return _FittedColumn(column.name, "frequency", categories=categories, frequencies=frequencies)

    def transform(self, table: RawTable) -> FeatureMatrix:
        """
        Encode rows with the fitted vocabularies.

        Unknown categories raise in strict mode; otherwise they are encoded as
        0 and counted in `FeatureMatrix.n_unknown`.

        Args:
            table: Rows with the fitted schema

        Returns:
            FeatureMatrix (unscaled)
        """
        if self.schema is None:
            raise RuntimeError("FeatureEncoder.transform called before fit")
        if [c.name for c in table.schema] != [c.name for c in self.schema]:
            raise DatasetError("Table schema differs from the schema the encoder was fitted on")

        blocks = []
        unknown = 0
        for column in self.columns:
            block, n_unknown = self._transform_column(column, table.frame[column.name])
            blocks.append(block)
            unknown += n_unknown

        n = table.n_rows
        values = np.hstack(blocks) if blocks else np.zeros((n, 0))
        if unknown:
            logger.warning(f"{unknown} unknown category values encoded as 0")
        return FeatureMatrix(values, table.labels, self.feature_names, None, unknown)

    def _unknown(self, column: _FittedColumn, values: pd.Series, mask: np.ndarray) -> int:
        count = int(mask.sum())
        if count and self.config.strict:
            example = values.to_numpy()[np.flatnonzero(mask)[0]]
            raise DatasetError(f"Unknown category {example!r} in column '{column.name}' ({count} rows)")
        return count

    def _transform_column(self, column: _FittedColumn, values: pd.Series) -> Tuple[np.ndarray, int]:
        n = len(values)
        if column.mode == "numeric":
            return values.to_numpy(dtype=np.float64).reshape(n, 1), 0
        if column.mode == "timestamp":
            stamps = pd.DatetimeIndex(values)
            return np.column_stack([stamps.hour, stamps.dayofweek]).astype(np.float64), 0

        text = values.astype(str).to_numpy()
        known = np.isin(text, column.categories)
        unknown = self._unknown(column, values, ~known)

        if column.mode == "binary":
            encoded = (text == column.positive).astype(np.float64) if column.positive else np.zeros(n)
            return encoded.reshape(n, 1), unknown
        if column.mode == "onehot":
            categories = np.asarray(column.categories, dtype=object)
            return (text[:, None] == categories[None, :]).astype(np.float64), unknown
        frequencies = np.array([column.frequencies.get(value, 0.0) for value in text], dtype=np.float64)
        return frequencies.reshape(n, 1), unknown


def encode(table: RawTable,
           config: Optional[EncodingConfig] = None,
           encoder: Optional[FeatureEncoder] = None) -> FeatureMatrix:
    """
    Encode a table, fitting a new encoder on it unless one is given.

    Args:
        table: Validated RawTable
        config: Encoding options
        encoder: Previously fitted encoder to reuse

    Returns:
        Unscaled FeatureMatrix
    """
    if encoder is None:
        encoder = FeatureEncoder(config).fit(table)
    return encoder.transform(table)


# ---------------------------------------------------------------------------
# Synthetic data with a known labelling rule
# ---------------------------------------------------------------------------

# (low, high) of the uniform draws; integers for Age
SYNTH_RANGES = {
    "Daily Time Spent on Site": (32.6, 91.0),
    "Age": (19, 60),
    "Area Income": (13996.5, 79332.33),
    "Daily Internet Usage": (105.22, 269.96),
}

# centers/scales used inside the score
_SCORE_CENTERS = {
    "Daily Time Spent on Site": (65.0, 15.0),
    "Age": (36.0, 9.0),
    "Area Income": (55000.0, 13000.0),
    "Daily Internet Usage": (180.0, 40.0),
}

_SCORE_DESCRIPTION = (
    "score = -1.0*t + 0.8*a - 0.6*i - 1.0*u + 0.7*t*u - 0.5*a*i + 0.6*cos(2*pi*hour/24), "
    "with t, a, i, u the centered/scaled Daily Time Spent on Site, Age, Area Income and "
    "Daily Internet Usage; label = 1 iff score > threshold, then flipped with probability noise_rate"
)

_REFERENCE_SEED = 20160101
_REFERENCE_ROWS = 100_000
_EPOCH = np.datetime64("2016-01-01T00:00:00")
_SPAN_SECONDS = 205 * 86400

_TOPIC_WORDS = (
    ("Adaptive", "Balanced", "Cloned", "Decentralized", "Enhanced", "Focused", "Grass-roots",
     "Horizontal", "Innovative", "Managed", "Optional", "Persistent", "Robust", "Synergized"),
    ("asynchronous", "bottom-line", "context-sensitive", "dynamic", "empowering", "global",
     "heuristic", "interactive", "logistical", "multimedia", "neutral", "real-time"),
    ("architecture", "benchmark", "capability", "database", "framework", "hierarchy",
     "initiative", "matrix", "moratorium", "paradigm", "portal", "toolset"),
)
_CITY_PARTS = (
    ("North", "South", "East", "West", "Lake", "New", "Port", "Fort", "Mount", "Glen"),
    ("haven", "field", "view", "burgh", "ton", "wood", "side", "chester", "mouth", "ville"),
)
_COUNTRIES = (
    "Australia", "Brazil", "Canada", "Chile", "China", "Denmark", "Egypt", "France", "Germany",
    "Greece", "Hungary", "India", "Ireland", "Italy", "Japan", "Kenya", "Mexico", "Norway",
    "Peru", "Poland", "Portugal", "Spain", "Sweden", "Turkey", "United Kingdom", "United States",
)


def _draw_frame(rng: np.random.Generator, n: int) -> pd.DataFrame:
    """Feature columns of the default schema, rounded to their CSV precision."""
    time_lo, time_hi = SYNTH_RANGES["Daily Time Spent on Site"]
    age_lo, age_hi = SYNTH_RANGES["Age"]
    inc_lo, inc_hi = SYNTH_RANGES["Area Income"]
    use_lo, use_hi = SYNTH_RANGES["Daily Internet Usage"]

    frame = pd.DataFrame({
        "Daily Time Spent on Site": np.round(rng.uniform(time_lo, time_hi, n), 2),
        "Age": rng.integers(age_lo, age_hi + 1, n).astype(np.float64),
        "Area Income": np.round(rng.uniform(inc_lo, inc_hi, n), 2),
        "Daily Internet Usage": np.round(rng.uniform(use_lo, use_hi, n), 2),
    })
    words = [np.asarray(group, dtype=object)[rng.integers(0, len(group), n)] for group in _TOPIC_WORDS]
    frame["Ad Topic Line"] = [" ".join(parts) for parts in zip(*words)]
    first, second = (np.asarray(group, dtype=object)[rng.integers(0, len(group), n)] for group in _CITY_PARTS)
    frame["City"] = [a + b for a, b in zip(first, second)]
    frame["Male"] = rng.integers(0, 2, n).astype(str).astype(object)
    frame["Country"] = np.asarray(_COUNTRIES, dtype=object)[rng.integers(0, len(_COUNTRIES), n)]
    seconds = rng.integers(0, _SPAN_SECONDS, n)
    frame["Timestamp"] = pd.to_datetime(_EPOCH + seconds.astype("timedelta64[s]"))
    return frame


def _raw_score(frame: pd.DataFrame) -> np.ndarray:
    z = {
        name: (frame[name].to_numpy(dtype=np.float64) - center) / width
        for name, (center, width) in _SCORE_CENTERS.items()
    }
    t = z["Daily Time Spent on Site"]
    a = z["Age"]
    i = z["Area Income"]
    u = z["Daily Internet Usage"]
    hour = pd.DatetimeIndex(frame["Timestamp"]).hour.to_numpy(dtype=np.float64)
    return (-1.0 * t + 0.8 * a - 0.6 * i - 1.0 * u + 0.7 * t * u - 0.5 * a * i
            + 0.6 * np.cos(2.0 * np.pi * hour / 24.0))


@functools.lru_cache(maxsize=32)
def _reference_threshold(class_balance: float) -> float:
    reference = _draw_frame(np.random.default_rng(_REFERENCE_SEED), _REFERENCE_ROWS)
    return float(np.quantile(_raw_score(reference), 1.0 - class_balance))


@dataclass(frozen=True)
class SynthRule:
    """The deterministic labelling rule behind `synthesize`."""
    threshold: float
    noise_rate: float
    class_balance: float

    @classmethod
    def from_config(cls, config: SynthConfig) -> "SynthRule":
        return cls(_reference_threshold(float(config.class_balance)),
                   float(config.noise_rate), float(config.class_balance))

    @property
    def bayes_accuracy(self) -> float:
        return 1.0 - self.noise_rate

    def score(self, table: RawTable) -> np.ndarray:
        return _raw_score(table.frame)

    def predict(self, table: RawTable) -> np.ndarray:
        """Noise-free labels of the rule."""
        return (self.score(table) > self.threshold).astype(np.int64)

    def describe(self) -> Dict[str, Union[str, float, Dict]]:
        return {
            "rule": _SCORE_DESCRIPTION,
            "centers": {name: list(pair) for name, pair in _SCORE_CENTERS.items()},
            "threshold": self.threshold,
            "noise_rate": self.noise_rate,
            "class_balance": self.class_balance,
            "bayes_accuracy": self.bayes_accuracy,
        }


def synthesize(config: SynthConfig, seed: int) -> RawTable:
    """
    Generate a default-schema table labelled by `SynthRule`, with labels
    flipped independently at `config.noise_rate`.

    Args:
        config: Row count, noise rate and target positive rate
        seed: Generator seed

    Returns:
        RawTable with DEFAULT_SCHEMA
    """
    if not isinstance(config.n_rows, int) or config.n_rows < 2:
        raise DatasetError(f"n_rows must be an integer >= 2, got {config.n_rows}")
    if not 0.0 <= config.noise_rate < 0.5:
        raise DatasetError(f"noise_rate must lie in [0, 0.5), got {config.noise_rate}")
    if not 0.0 < config.class_balance < 1.0:
        raise DatasetError(f"class_balance must lie in (0, 1), got {config.class_balance}")

    rule = SynthRule.from_config(config)
    rng = np.random.default_rng(seed)
    frame = _draw_frame(rng, config.n_rows)
    clean = (_raw_score(frame) > rule.threshold).astype(np.int64)
    flips = rng.random(config.n_rows) < config.noise_rate
    frame["Clicked on Ad"] = np.where(flips, 1 - clean, clean).astype(np.int64)

    logger.info(
        f"Synthesized {config.n_rows} rows (noise {config.noise_rate}, "
        f"{int(flips.sum())} flipped, positive rate {frame['Clicked on Ad'].mean():.3f})"
    )
    return RawTable(DEFAULT_SCHEMA, frame[[column.name for column in DEFAULT_SCHEMA]])
