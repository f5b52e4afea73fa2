"""
Gradient-boosted trees baseline.
"""

from typing import Dict

from core.config import GbtConfig
from core.serialization import gbt_from_payload, gbt_to_payload
from core.trees import gbt_fit, gbt_predict

from .base_learner import BaseLearner


class GradientBoostedTreesLearner(BaseLearner):
    kind = "gbt"
    config_class = GbtConfig

    def _fit(self, trainset):
        return gbt_fit(trainset, self.config)

    def _predict(self, matrix):
        return gbt_predict(self.model, matrix)

    def to_payload(self) -> Dict:
        return gbt_to_payload(self.model)

    def load_payload(self, payload: Dict) -> None:
        self.model = gbt_from_payload(payload)

    def describe(self) -> Dict:
        return {
            "n_trees": len(self.model.trees),
            "train_log_loss": round(self.model.train_log_loss[-1], 6),
        }
