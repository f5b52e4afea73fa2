"""
Shared fixtures for the clickboost test suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.config import SynthConfig
from core.dataset import FeatureMatrix, synthesize


SAMPLE_HEADER = "Daily Time Spent on Site,Age,Area Income,Daily Internet Usage,Clicked on Ad"

# The selected rows printed with the dataset description
SAMPLE_ROWS = [
    (62.26, 32, 69481.85, 172.83, 0),
    (41.73, 31, 61840.26, 207.17, 0),
    (44.4, 30, 57877.15, 172.83, 0),
    (59.88, 28, 56180.93, 207.17, 0),
    (49.21, 30, 54324.73, 201.58, 1),
    (51.3, 26, 51463.17, 131.68, 0),
    (66.08, 43, 73538.09, 136.4, 1),
    (36.08, 26, 74903.41, 228.78, 0),
    (46.14, 33, 43974.49, 196.77, 0),
    (51.65, 51, 74535.94, 188.56, 0),
    (47.64, 29, 53431.35, 200.71, 0),
    (65.07, 34, 34191.23, 187.09, 1),
    (55.6, 24, 52252.91, 167.22, 1),
    (62.26, 25, 50671.6, 138.71, 0),
    (78.84, 27, 69646.35, 239.32, 0),
    (56.39, 40, 40468.53, 140.46, 1),
    (54.43, 39, 56180.93, 124.44, 0),
]


def write_sample_csv(path: Path, rows=SAMPLE_ROWS) -> Path:
    lines = [SAMPLE_HEADER] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def make_matrix(values, labels, names=None) -> FeatureMatrix:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    names = names or tuple(f"f{j}" for j in range(values.shape[1]))
    return FeatureMatrix(values, np.asarray(labels, dtype=np.int64), tuple(names))


@pytest.fixture(autouse=True)
def log_dir(tmp_path_factory, monkeypatch):
    """Keep the CLI's log file out of the working tree."""
    path = tmp_path_factory.mktemp("logs")
    monkeypatch.setenv("CLICKBOOST_LOG_DIR", str(path))
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def sample_csv(tmp_path):
    return write_sample_csv(tmp_path / "sample.csv")


@pytest.fixture
def synth_table():
    return synthesize(SynthConfig(n_rows=300, noise_rate=0.1), seed=11)


@pytest.fixture
def separable_matrix():
    """Two tight clusters at -2 / +2 on the last feature; the others are small noise."""
    rng = np.random.default_rng(7)
    n = 40
    labels = np.array([0, 1] * (n // 2))
    values = rng.normal(0.0, 0.1, size=(n, 3))
    values[:, 2] = np.where(labels == 1, 2.0, -2.0) + rng.normal(0.0, 0.05, n)
    return make_matrix(values, labels)


def small_experiment(output_dir: Path, **overrides) -> dict:
    """A quick five-model experiment on synthetic data."""
    raw = {
        "name": "smoke",
        "seed": 5,
        "output_dir": str(output_dir),
        "dataset": {"synth": {"n_rows": 160, "noise_rate": 0.1}},
        "models": [
            {"name": "tree", "kind": "tree", "params": {"max_depth": 3}},
            {"name": "forest", "kind": "forest", "params": {"n_trees": 5, "tree": {"max_depth": 3}}},
            {"name": "gbt", "kind": "gbt", "params": {"n_rounds": 5, "tree": {"max_depth": 2}}},
            {"name": "lstm", "kind": "lstm", "params": {"hidden_size": 3, "epochs": 10}},
            {"name": "boosted", "kind": "lstm_adaboost",
             "params": {"n_rounds": 3, "learner_kind": "tree"}},
        ],
    }
    raw.update(overrides)
    return raw


@pytest.fixture
def experiment_yaml(tmp_path):
    path = tmp_path / "experiment.yaml"
    path.write_text(yaml.safe_dump(small_experiment(tmp_path / "out")), encoding="utf-8")
    return path
