"""
Single CART decision tree baseline.
"""

from typing import Dict

from core.config import TreeConfig
from core.serialization import tree_from_payload, tree_to_payload
from core.trees import tree_fit, tree_predict

from .base_learner import BaseLearner


class DecisionTreeLearner(BaseLearner):
    """Sample-weighted Gini CART on the raw-encoded features."""

    kind = "tree"
    config_class = TreeConfig

    def _fit(self, trainset):
        return tree_fit(trainset, None, self.config)

    def _predict(self, matrix):
        return tree_predict(self.model, matrix)

    def to_payload(self) -> Dict:
        return tree_to_payload(self.model)

    def load_payload(self, payload: Dict) -> None:
        self.model = tree_from_payload(payload)

    def describe(self) -> Dict:
        return {"depth": self.model.depth(), "n_nodes": self.model.n_nodes()}
