"""
Tests for the AdaBoost weight rules, the boosting loop and ensemble prediction.
"""

import math

import numpy as np
import pytest

from core import lstm
from core.boosting import (
    BoostRound,
    EnsembleModel,
    boost_fit,
    ensemble_predict,
    ensemble_score,
    init_weights,
    learner_weight,
    round_predict,
    update_weights,
    weighted_error,
)
from core.config import BoostConfig, SynthConfig, TrainConfig, TreeConfig
from core.dataset import encode, fit_standardize, synthesize
from core.exceptions import FingerprintMismatchError, TrainingError
from core.trees import TreeNode, tree_to_preorder

from conftest import make_matrix


TREE_BOOST = BoostConfig(learner_kind="tree", tree=TreeConfig(max_depth=1, min_samples_leaf=1))


class TestWeights:

    def test_init(self):
        np.testing.assert_array_equal(init_weights(4), [0.25] * 4)
        np.testing.assert_array_equal(init_weights(1), [1.0])
        weights = init_weights(1000)
        assert np.all(weights == weights[0])
        assert abs(weights.sum() - 1.0) <= 1e-12

    def test_init_empty(self):
        with pytest.raises(ValueError):
            init_weights(0)

    def test_weighted_error(self):
        weights = init_weights(4)
        labels = np.array([0, 1, 1, 0])
        assert weighted_error(labels, labels, weights) == 0.0
        assert weighted_error(1 - labels, labels, weights) == 1.0
        assert weighted_error(np.array([1, 1, 1, 0]), labels, weights) == 0.25

    def test_weights_must_be_a_distribution(self):
        labels = np.array([0, 1, 1, 0])
        for bad in (np.full(4, 0.5), np.array([0.5, 0.5, 0.5, -0.5]), np.array([0.25, 0.25, 0.25, np.nan])):
            with pytest.raises(ValueError):
                weighted_error(labels, labels, bad)
            with pytest.raises(ValueError):
                update_weights(bad, labels, labels, 0.3)

    def test_weighted_error_length_mismatch(self):
        with pytest.raises(ValueError):
            weighted_error(np.array([0, 1]), np.array([0, 1, 1]), init_weights(3))

    def test_learner_weight_values(self):
        assert learner_weight(0.5) == 0.0
        assert learner_weight(0.1) == pytest.approx(0.5 * math.log(9))
        assert learner_weight(0.0) == pytest.approx(11.5129, abs=1e-4)
        assert math.isfinite(learner_weight(1.0))

    def test_learner_weight_shape(self):
        grid = np.linspace(1e-10, 1 - 1e-10, 200)
        alphas = [learner_weight(e) for e in grid]
        assert all(a > b for a, b in zip(alphas, alphas[1:]))
        for e in (0.01, 0.2, 0.37):
            assert learner_weight(e) == pytest.approx(-learner_weight(1 - e), abs=1e-12)

    def test_zero_alpha_keeps_weights(self, rng):
        weights = rng.dirichlet(np.ones(6))
        preds, labels = rng.integers(0, 2, 6), rng.integers(0, 2, 6)
        np.testing.assert_allclose(update_weights(weights, preds, labels, 0.0), weights, rtol=1e-15)

    def test_hand_update(self):
        labels = np.array([1, 1, 0, 0])
        preds = np.array([0, 1, 0, 0])
        updated = update_weights(init_weights(4), preds, labels, 0.5 * math.log(3))
        np.testing.assert_allclose(updated, [0.5, 1 / 6, 1 / 6, 1 / 6], rtol=1e-12)

    def test_exact_alpha_balances_mass(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 50))
            weights = rng.dirichlet(np.ones(n))
            labels = rng.integers(0, 2, n)
            preds = np.where(rng.random(n) < 0.3, 1 - labels, labels)
            epsilon = weighted_error(preds, labels, weights)
            if not 0 < epsilon < 0.5:
                continue
            updated = update_weights(weights, preds, labels, learner_weight(epsilon))
            assert abs(updated.sum() - 1.0) <= 1e-12
            assert updated[preds != labels].sum() == pytest.approx(0.5, abs=1e-9)

    def test_non_finite_alpha(self):
        with pytest.raises(ValueError):
            update_weights(init_weights(2), np.array([0, 1]), np.array([0, 1]), math.inf)


class TestEnsemblePrediction:

    @staticmethod
    def constant_round(label, alpha):
        return BoostRound(TreeNode(value=float(label)), epsilon=0.2, alpha=alpha)

    def test_hand_score(self):
        model = EnsembleModel([self.constant_round(1, 1.0), self.constant_round(0, 0.6)], "tree")
        labels, score = ensemble_predict(model, make_matrix([[0.0]], [0]))
        assert score[0] == pytest.approx(0.4)
        assert labels[0] == 1

    def test_tie_goes_positive(self):
        model = EnsembleModel([self.constant_round(1, 0.5), self.constant_round(0, 0.5)], "tree")
        labels, score = ensemble_predict(model, make_matrix([[0.0]], [0]))
        assert score[0] == 0.0
        assert labels[0] == 1

    def test_agreeing_rounds(self, rng):
        for label in (0, 1):
            rounds = [self.constant_round(label, a) for a in rng.uniform(0.1, 3.0, 4)]
            labels, _ = ensemble_predict(EnsembleModel(rounds, "tree"), make_matrix(np.zeros((3, 1)), [0, 1, 0]))
            np.testing.assert_array_equal(labels, label)

    def test_scaler_mismatch(self):
        model = EnsembleModel([self.constant_round(1, 1.0)], "tree", scaler_fingerprint="0" * 64)
        with pytest.raises(FingerprintMismatchError):
            ensemble_score(model, make_matrix([[0.0]], [0]))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            round_predict("svm", TreeNode(1.0), make_matrix([[0.0]], [0]))

    def test_prefix_bounds(self):
        model = EnsembleModel([self.constant_round(1, 1.0)] * 3, "tree", training_errors=[0.3, 0.2, 0.1])
        assert model.prefix(2).n_rounds == 2
        assert model.prefix(2).training_errors == [0.3, 0.2]
        for m in (0, 4):
            with pytest.raises(ValueError):
                model.prefix(m)


class TestBoostFit:

    def test_perfect_learner_stops_after_one_round(self, separable_matrix):
        model = boost_fit(TREE_BOOST.model_copy(update={"n_rounds": 5}), separable_matrix)
        assert model.n_rounds == 1
        assert model.rounds[0].epsilon == 0.0
        assert model.rounds[0].alpha == pytest.approx(learner_weight(0.0))

    def test_no_usable_round(self):
        data = make_matrix(np.ones((6, 2)), [0, 1, 0, 1, 0, 1])
        with pytest.raises(TrainingError, match="zero rounds"):
            boost_fit(TREE_BOOST, data)

    def test_single_round_matches_learner(self, synth_table):
        data = encode(synth_table)
        model = boost_fit(TREE_BOOST.model_copy(update={"n_rounds": 1}), data)
        assert model.n_rounds == 1
        weak = round_predict("tree", model.rounds[0].learner, data)
        np.testing.assert_array_equal(ensemble_predict(model, data)[0], weak)

    def test_training_error_bound(self):
        data = encode(synthesize(SynthConfig(n_rows=400, noise_rate=0.05), seed=8))
        model = boost_fit(TREE_BOOST.model_copy(update={"n_rounds": 12}), data)
        assert model.n_rounds >= 3
        bound = 1.0
        for m, boost_round in enumerate(model.rounds, start=1):
            bound *= 2 * math.sqrt(boost_round.epsilon * (1 - boost_round.epsilon))
            measured = np.mean(ensemble_predict(model.prefix(m), data)[0] != data.labels)
            assert measured == pytest.approx(model.training_errors[m - 1])
            assert measured <= bound + 1e-12

    def test_alpha_sign_follows_epsilon(self, synth_table):
        model = boost_fit(TREE_BOOST.model_copy(update={"n_rounds": 6}), encode(synth_table))
        for boost_round in model.rounds:
            assert boost_round.epsilon < 0.5
            assert boost_round.alpha > 0

    def test_target_error_stops_early(self, synth_table):
        config = TREE_BOOST.model_copy(update={"n_rounds": 6, "target_error": 0.49})
        assert boost_fit(config, encode(synth_table)).n_rounds == 1

    def test_row_permutation_invariance(self, synth_table, rng):
        data = encode(synth_table)
        perm = rng.permutation(data.n_samples)
        config = TREE_BOOST.model_copy(update={"n_rounds": 4})
        a = boost_fit(config, data)
        b = boost_fit(config, data.take(perm))
        assert [r.epsilon for r in a.rounds] == pytest.approx([r.epsilon for r in b.rounds], abs=1e-12)
        assert [r.alpha for r in a.rounds] == pytest.approx([r.alpha for r in b.rounds], abs=1e-9)
        for ra, rb in zip(a.rounds, b.rounds):
            nodes_a, nodes_b = tree_to_preorder(ra.learner), tree_to_preorder(rb.learner)
            assert [n[:-1] for n in nodes_a] == [n[:-1] for n in nodes_b]
            assert [n[-1] for n in nodes_a] == pytest.approx([n[-1] for n in nodes_b], abs=1e-12)

    def test_lstm_rounds(self, separable_matrix):
        scaled, scaler = fit_standardize(separable_matrix)
        config = BoostConfig(n_rounds=2, hidden_sizes=(2, 3),
                             lstm=TrainConfig(epochs=100, learning_rate=0.5))
        model = boost_fit(config, scaled)
        assert model.learner_kind == "lstm"
        assert model.scaler_fingerprint == scaler.fingerprint()
        assert model.rounds[0].learner.hidden_size == 2
        assert np.mean(ensemble_predict(model, scaled)[0] == scaled.labels) >= 0.95


class TestRoundConfigs:

    def test_hidden_sizes_cycle(self):
        config = BoostConfig(hidden_sizes=(8, 12, 16))
        assert [config.round_train_config(m).hidden_size for m in range(5)] == [8, 12, 16, 8, 12]

    def test_round_seeds_differ(self):
        config = BoostConfig(seed=3)
        seeds = {config.round_train_config(m).seed for m in range(10)}
        assert len(seeds) == 10

    def test_rounds_train_different_networks(self, separable_matrix):
        scaled, _ = fit_standardize(separable_matrix)
        config = BoostConfig(hidden_sizes=(3,), lstm=TrainConfig(epochs=5))
        weights = init_weights(scaled.n_samples)
        fingerprints = {
            lstm.train(config.round_train_config(m), scaled, weights).fingerprint() for m in range(3)
        }
        assert len(fingerprints) == 3
