"""
AdaBoost ensemble of LSTM weak learners (the improved model).
"""

from typing import Dict, Optional, Tuple

import numpy as np

from core.boosting import EnsembleModel, boost_fit, ensemble_predict
from core.config import BoostConfig
from core.dataset import FeatureMatrix
from core.serialization import ensemble_from_payload, ensemble_to_payload

from .base_learner import BaseLearner


class LstmAdaBoostLearner(BaseLearner):
    """
    Boosted LSTMs with hidden sizes cycled per round.

    `learner_kind: tree` in the params swaps the weak learner for a depth-limited
    CART tree while keeping the same boosting loop.
    """

    kind = "lstm_adaboost"
    config_class = BoostConfig
    needs_scaling = True

    def _fit(self, trainset):
        return boost_fit(self.config, trainset)

    def _predict(self, matrix):
        return ensemble_predict(self.model, matrix)

    def predict_rounds(self, matrix: FeatureMatrix, n_rounds: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Predict with the strong classifier made of the first `n_rounds` rounds.

        Args:
            matrix: Standardized rows
            n_rounds: Prefix length (all rounds when None)

        Returns:
            (labels, scores)
        """
        model: EnsembleModel = self.model
        if n_rounds is not None:
            model = model.prefix(n_rounds)
        return ensemble_predict(model, matrix)

    def to_payload(self) -> Dict:
        return ensemble_to_payload(self.model)

    def load_payload(self, payload: Dict) -> None:
        self.model = ensemble_from_payload(payload)

    def describe(self) -> Dict:
        return {
            "learner_kind": self.model.learner_kind,
            "n_rounds": self.model.n_rounds,
            "alphas": [round(r.alpha, 6) for r in self.model.rounds],
            "final_train_error": self.model.training_errors[-1],
        }
