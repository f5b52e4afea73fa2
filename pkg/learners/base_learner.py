"""
Base Learner class for all experiment models.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Tuple, Type

import numpy as np
from loguru import logger
from pydantic import BaseModel, ValidationError

from core.config import derive_seed
from core.dataset import FeatureMatrix
from core.exceptions import ConfigError, TrainingError


class BaseLearner(ABC):
    """Base class for all learners an experiment can list."""

    kind: str = ""
    config_class: Type[BaseModel]
    needs_scaling: bool = False

    def __init__(self,
                 name: str,
                 params: Optional[Dict[str, Any]] = None,
                 root_seed: int = 0):
        """
        Initialize base learner.

        Args:
            name: Model name, unique within an experiment
            params: Hyperparameter overrides validated by `config_class`
            root_seed: Global experiment seed; the learner's own seed derives from it
        """
        self.name = name
        self.params = dict(params or {})
        self.seed = derive_seed(root_seed, "model", name)
        self.config = self.build_config(self.params, self.seed)
        self.model: Any = None
        logger.info(f"Learner initialized: {self.name} ({self.kind})")

    def build_config(self, params: Dict[str, Any], seed: int) -> BaseModel:
        """
        Validate hyperparameters, filling in the derived seed when the config has one.

        Args:
            params: Hyperparameter overrides
            seed: Derived learner seed

        Returns:
            Validated config model
        """
        raw = dict(params)
        if "seed" in self.config_class.model_fields and "seed" not in raw:
            raw["seed"] = seed
        try:
            return self.config_class.model_validate(raw)
        except ValidationError as e:
            raise ConfigError(f"Invalid params for model '{self.name}': {e}") from e

    @property
    def is_fitted(self) -> bool:
        return self.model is not None

    def fit(self, trainset: FeatureMatrix) -> "BaseLearner":
        """
        Train on the training partition.

        Args:
            trainset: Encoded (and, for scaled learners, standardized) rows

        Returns:
            self
        """
        logger.info(f"{self.name} training on {trainset.n_samples} rows x {trainset.n_features} features...")
        try:
            self.model = self._fit(trainset)
        except TrainingError as e:
            raise TrainingError(f"Model '{self.name}' failed to train: {e}") from e
        except ValueError as e:
            raise TrainingError(f"Model '{self.name}' failed to train: {e}") from e
        logger.info(f"{self.name} trained: {self.describe()}")
        return self

    def predict(self, matrix: FeatureMatrix) -> Tuple[np.ndarray, np.ndarray]:
        """
        Predict labels and continuous scores.

        Args:
            matrix: Rows preprocessed like the training partition

        Returns:
            (labels in {0, 1}, scores)
        """
        if not self.is_fitted:
            raise ValueError(f"Model '{self.name}' is not fitted")
        return self._predict(matrix)

    @abstractmethod
    def _fit(self, trainset: FeatureMatrix) -> Any:
        """Train and return the underlying model object."""
        pass

    @abstractmethod
    def _predict(self, matrix: FeatureMatrix) -> Tuple[np.ndarray, np.ndarray]:
        pass

    @abstractmethod
    def to_payload(self) -> Dict:
        """JSON-compatible dump of the fitted model."""
        pass

    @abstractmethod
    def load_payload(self, payload: Dict) -> None:
        """Restore the fitted model from `to_payload` output."""
        pass

    def describe(self) -> Dict[str, Any]:
        """Short summary of the fitted model for logs and the run manifest."""
        return {}

    @classmethod
    def from_payload(cls,
                     name: str,
                     payload: Dict,
                     params: Optional[Dict[str, Any]] = None,
                     root_seed: int = 0) -> "BaseLearner":
        learner = cls(name, params, root_seed)
        try:
            learner.load_payload(payload)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed payload for model '{name}': {e}") from e
        return learner
