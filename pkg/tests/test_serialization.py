"""
Tests for model payloads, the model-file envelope and the learner registry.
"""

import json

import numpy as np
import pytest

from core.config import ModelSpec
from core.dataset import encode, fit_standardize
from core.exceptions import ConfigError, TrainingError
from core.serialization import (
    MODEL_FORMAT,
    ensemble_from_payload,
    forest_from_payload,
    read_model_file,
    write_model_file,
)
from learners import (
    DecisionTreeLearner,
    LstmAdaBoostLearner,
    LstmLearner,
    create_learner,
    learner_class,
)
from tools.io_tools import IOTools


SMALL_PARAMS = {
    "tree": {"max_depth": 3},
    "forest": {"n_trees": 4, "tree": {"max_depth": 3}},
    "gbt": {"n_rounds": 4, "tree": {"max_depth": 2}},
    "lstm": {"hidden_size": 3, "epochs": 15},
    "lstm_adaboost": {"n_rounds": 3, "hidden_sizes": [2, 3], "lstm": {"epochs": 15}},
}


def through_json(payload):
    return json.loads(IOTools.canonical_json(payload))


@pytest.fixture
def partitions(synth_table):
    raw = encode(synth_table)
    scaled, _ = fit_standardize(raw)
    return raw, scaled


class TestLearnerPayloads:

    @pytest.mark.parametrize("kind", sorted(SMALL_PARAMS))
    def test_reload_is_bit_exact(self, kind, partitions):
        learner = create_learner(ModelSpec(name=f"m_{kind}", kind=kind, params=SMALL_PARAMS[kind]), root_seed=2)
        data = partitions[1] if learner.needs_scaling else partitions[0]
        try:
            learner.fit(data)
        except TrainingError:
            pytest.skip("weak learner could not beat chance on this draw")
        payload = learner.to_payload()
        restored = learner_class(kind).from_payload(learner.name, through_json(payload), learner.params, 2)
        assert IOTools.canonical_json(restored.to_payload()) == IOTools.canonical_json(payload)
        for original, reloaded in zip(learner.predict(data), restored.predict(data)):
            np.testing.assert_array_equal(original, reloaded)

    def test_lstm_payload_restores_layout_and_config(self, partitions):
        scaled = partitions[1]
        learner = LstmLearner("solo", {"hidden_size": 3, "epochs": 5, "learning_rate": 0.2}, root_seed=3).fit(scaled)
        payload = through_json(learner.to_payload())
        assert payload["layout"]["order"] == list(range(scaled.n_features))
        assert payload["config"]["hidden_size"] == 3 and payload["config"]["learning_rate"] == 0.2

        restored = LstmLearner.from_payload("solo", payload, root_seed=99)
        assert restored.config == learner.config
        assert restored.layout == learner.layout
        np.testing.assert_array_equal(restored.predict(scaled)[1], learner.predict(scaled)[1])

        payload["config"]["hidden_size"] = 4
        with pytest.raises(ConfigError, match="Malformed"):
            LstmLearner.from_payload("solo", payload)

    def test_seed_derives_from_name(self):
        a = DecisionTreeLearner("a", root_seed=1)
        b = DecisionTreeLearner("b", root_seed=1)
        lstm_a = LstmLearner("a", root_seed=1)
        assert a.seed != b.seed
        assert lstm_a.config.seed == lstm_a.seed == a.seed

    def test_explicit_seed_wins(self):
        assert LstmLearner("a", {"seed": 9}, root_seed=1).config.seed == 9

    def test_invalid_params(self):
        with pytest.raises(ConfigError, match="bad"):
            LstmLearner("bad", {"hidden_size": 0})
        with pytest.raises(ConfigError):
            DecisionTreeLearner("extra", {"depth": 3})

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="svm"):
            learner_class("svm")

    def test_predict_before_fit(self, partitions):
        with pytest.raises(ValueError, match="not fitted"):
            DecisionTreeLearner("t").predict(partitions[0])

    def test_malformed_payload(self):
        with pytest.raises(ConfigError, match="Malformed"):
            LstmAdaBoostLearner.from_payload("x", {"learner_kind": "lstm"})

    def test_training_error_names_model(self):
        from conftest import make_matrix

        data = make_matrix(np.ones((6, 2)), [0, 1, 0, 1, 0, 1])
        learner = LstmAdaBoostLearner("boosted", {"learner_kind": "tree"})
        with pytest.raises(TrainingError, match="boosted"):
            learner.fit(data)

    def test_prefix_prediction(self, partitions):
        raw, _ = partitions
        learner = LstmAdaBoostLearner("b", {"learner_kind": "tree", "n_rounds": 4}).fit(raw)
        full = learner.predict(raw)
        prefix = learner.predict_rounds(raw, learner.model.n_rounds)
        np.testing.assert_array_equal(full[1], prefix[1])
        assert learner.describe()["n_rounds"] == learner.model.n_rounds


class TestPayloadChecks:

    def test_forest_tree_count(self):
        payload = {"m_try": 1, "n_trees": 2, "seed": 0, "trees": [[["leaf", 1.0]]]}
        with pytest.raises(ValueError, match="trees"):
            forest_from_payload(payload)

    def test_ensemble_round_counts(self):
        payload = {
            "learner_kind": "tree", "n_rounds": 2, "alphas": [1.0], "epsilons": [0.1],
            "learners": [{"nodes": [["leaf", 1.0]]}],
        }
        with pytest.raises(ValueError, match="round counts"):
            ensemble_from_payload(payload)

    def test_ensemble_kind(self):
        with pytest.raises(ValueError, match="kind"):
            ensemble_from_payload({"learner_kind": "svm"})


class TestModelFile:

    def test_envelope(self, tmp_path):
        path = write_model_file(tmp_path / "models" / "m.json", {"name": "m", "model": {"nodes": [["leaf", 0.5]]}})
        content = read_model_file(path)
        assert content["format"] == MODEL_FORMAT
        assert content["version"] == 1
        assert content["model"] == {"nodes": [["leaf", 0.5]]}

    def test_written_twice_is_identical(self, tmp_path):
        envelope = {"name": "m", "model": {"values": [0.1, 1 / 3, 2.5e-17]}}
        a = write_model_file(tmp_path / "a.json", envelope)
        b = write_model_file(tmp_path / "b.json", envelope)
        assert a.read_bytes() == b.read_bytes()
        assert read_model_file(a)["model"]["values"] == [0.1, 1 / 3, 2.5e-17]

    def test_not_a_model_file(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text('{"hello": 1}', encoding="utf-8")
        with pytest.raises(ConfigError, match="not a clickboost model"):
            read_model_file(path)

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text(json.dumps({"format": MODEL_FORMAT, "version": 99}), encoding="utf-8")
        with pytest.raises(ConfigError, match="version"):
            read_model_file(path)

    def test_unreadable(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigError):
            read_model_file(path)
        with pytest.raises(ConfigError):
            read_model_file(tmp_path / "missing.json")
