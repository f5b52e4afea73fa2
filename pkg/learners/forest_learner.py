"""
Random forest baseline.
"""

from typing import Dict

from core.config import ForestConfig
from core.serialization import forest_from_payload, forest_to_payload
from core.trees import forest_fit, forest_predict

from .base_learner import BaseLearner


class RandomForestLearner(BaseLearner):
    kind = "forest"
    config_class = ForestConfig

    def _fit(self, trainset):
        return forest_fit(trainset, self.config)

    def _predict(self, matrix):
        return forest_predict(self.model, matrix)

    def to_payload(self) -> Dict:
        return forest_to_payload(self.model)

    def load_payload(self, payload: Dict) -> None:
        self.model = forest_from_payload(payload)

    def describe(self) -> Dict:
        return {
            "n_trees": self.model.n_trees,
            "m_try": self.model.m_try,
            "mean_depth": sum(tree.depth() for tree in self.model.trees) / self.model.n_trees,
        }
