"""
Discrete two-class AdaBoost over pluggable weak learners (LSTM or CART tree).
"""

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple, Union

import numpy as np
from loguru import logger
from tqdm import tqdm

from . import lstm
from .config import BoostConfig
from .dataset import FeatureMatrix, check_weights
from .exceptions import FingerprintMismatchError, TrainingError
from .lstm import LstmParams, SequenceLayout
from .trees import TreeNode, tree_fit, tree_predict


WeakLearnerHandle = Union[LstmParams, TreeNode]


def init_weights(n: int) -> np.ndarray:
    """Uniform distribution over n samples."""
    if n < 1:
        raise ValueError("init_weights needs at least one sample")
    weights = np.full(n, 1.0 / n)
    return weights / weights.sum()


def _pm_one(labels: np.ndarray) -> np.ndarray:
    return 2.0 * np.asarray(labels, dtype=np.float64) - 1.0


def weighted_error(preds: np.ndarray, labels: np.ndarray, weights: np.ndarray) -> float:
    """Total weight on misclassified samples."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValueError(f"length mismatch: {preds.shape} predictions, {labels.shape} labels")
    weights = check_weights(weights, labels.shape[0])
    epsilon = float(weights[preds != labels].sum())
    return min(max(epsilon, 0.0), 1.0)


def learner_weight(epsilon: float, epsilon_min: float = 1e-10) -> float:
    """alpha = 0.5 * ln((1 - eps) / eps) with eps clamped into [eps_min, 1 - eps_min]."""
    epsilon = min(max(float(epsilon), epsilon_min), 1.0 - epsilon_min)
    return 0.5 * math.log((1.0 - epsilon) / epsilon)


def update_weights(weights: np.ndarray, preds: np.ndarray, labels: np.ndarray, alpha: float) -> np.ndarray:
    """
    w_i <- w_i * exp(-alpha * y_i * h_i) with labels mapped to {-1, +1}, then renormalized.
    """
    weights = check_weights(weights, np.asarray(labels).shape[0])
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    margin = _pm_one(labels) * _pm_one(preds)
    if margin.shape != weights.shape:
        raise ValueError(f"length mismatch: {margin.shape} vs {weights.shape}")
    updated = weights * np.exp(-alpha * margin)
    total = updated.sum()
    if not total > 0 or not math.isfinite(total):
        raise ValueError("weight update produced an all-zero or non-finite vector")
    return updated / total


@dataclass(frozen=True)
class BoostRound:
    learner: WeakLearnerHandle
    epsilon: float
    alpha: float


@dataclass
class EnsembleModel:
    """Ordered weighted-vote rounds forming the strong classifier."""
    rounds: List[BoostRound]
    learner_kind: str
    layout: Optional[SequenceLayout] = None
    scaler_fingerprint: Optional[str] = None
    training_errors: List[float] = field(default_factory=list)

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def prefix(self, m: int) -> "EnsembleModel":
        """The strong classifier made of the first m rounds."""
        if not 1 <= m <= self.n_rounds:
            raise ValueError(f"prefix length must lie in [1, {self.n_rounds}], got {m}")
        return replace(self, rounds=self.rounds[:m], training_errors=self.training_errors[:m])


def round_predict(learner_kind: str, learner: WeakLearnerHandle, matrix: FeatureMatrix,
                  layout: Optional[SequenceLayout] = None) -> np.ndarray:
    """{0, 1} predictions of one weak learner."""
    if learner_kind == "lstm":
        labels, _ = lstm.predict(learner, matrix, layout)
    elif learner_kind == "tree":
        labels, _ = tree_predict(learner, matrix)
    else:
        raise ValueError(f"Unknown weak learner kind: {learner_kind}")
    return labels


def _fit_round(config: BoostConfig, round_index: int, trainset: FeatureMatrix,
               weights: np.ndarray, layout: Optional[SequenceLayout]) -> WeakLearnerHandle:
    if config.learner_kind == "lstm":
        return lstm.train(config.round_train_config(round_index), trainset, weights, layout)
    return tree_fit(trainset, weights, config.tree)


def boost_fit(config: BoostConfig, trainset: FeatureMatrix) -> EnsembleModel:
    """
    Train an AdaBoost ensemble.

    A round whose weighted error reaches 0.5 is discarded and ends training;
    a round at or below epsilon_min is kept and ends training, as does
    reaching `target_error` on the training set.

    Args:
        config: Boosting settings
        trainset: Training rows (standardized for the LSTM learner)

    Returns:
        EnsembleModel with at least one round
    """
    n = trainset.n_samples
    labels = trainset.labels
    layout = SequenceLayout.canonical(trainset.n_features) if config.learner_kind == "lstm" else None
    model = EnsembleModel([], config.learner_kind, layout, trainset.scaler_fingerprint())

    weights = init_weights(n)
    score = np.zeros(n)
    rounds = tqdm(range(config.n_rounds), desc=f"adaboost[{config.learner_kind}]",
                  disable=not config.show_progress)
    for m in rounds:
        learner = _fit_round(config, m, trainset, weights, layout)
        preds = round_predict(config.learner_kind, learner, trainset, layout)
        epsilon = weighted_error(preds, labels, weights)
        if epsilon >= 0.5:
            logger.warning(f"Round {m + 1}: weighted error {epsilon:.4f} >= 0.5, round discarded, stopping")
            break

        alpha = learner_weight(epsilon, config.epsilon_min)
        model.rounds.append(BoostRound(learner, epsilon, alpha))
        score += alpha * _pm_one(preds)
        train_error = float(np.mean((score >= 0).astype(np.int64) != labels))
        model.training_errors.append(train_error)
        logger.info(
            f"Round {m + 1}/{config.n_rounds}: epsilon={epsilon:.4f} alpha={alpha:.4f} "
            f"ensemble train error={train_error:.4f}"
        )

        if epsilon <= config.epsilon_min:
            logger.info("Weak learner is perfect on the weighted training set, stopping")
            break
        if config.target_error is not None and train_error <= config.target_error:
            logger.info(f"Training error {train_error:.4f} meets target {config.target_error}, stopping")
            break
        weights = update_weights(weights, preds, labels, alpha)

    if not model.rounds:
        raise TrainingError("AdaBoost recorded zero rounds: the first weak learner has weighted error >= 0.5")
    return model


def ensemble_score(model: EnsembleModel, matrix: FeatureMatrix) -> np.ndarray:
    """sum_m alpha_m * h_m(x) with h_m in {-1, +1}."""
    if not model.rounds:
        raise ValueError("Ensemble has no rounds")
    if model.scaler_fingerprint != matrix.scaler_fingerprint():
        raise FingerprintMismatchError(
            "Matrix was preprocessed with a different scaler than the ensemble was trained on"
        )
    score = np.zeros(matrix.n_samples)
    for boost_round in model.rounds:
        preds = round_predict(model.learner_kind, boost_round.learner, matrix, model.layout)
        score += boost_round.alpha * _pm_one(preds)
    return score


def ensemble_predict(model: EnsembleModel, matrix: FeatureMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """(labels, scores); label = 1 iff score >= 0."""
    score = ensemble_score(model, matrix)
    return (score >= 0).astype(np.int64), score
