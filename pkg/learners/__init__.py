"""
Learners an experiment can list, keyed by model kind.
"""

from typing import Dict, Type

from core.config import ModelSpec
from core.exceptions import ConfigError

from .base_learner import BaseLearner
from .tree_learner import DecisionTreeLearner
from .forest_learner import RandomForestLearner
from .gbt_learner import GradientBoostedTreesLearner
from .lstm_learner import LstmLearner
from .lstm_adaboost_learner import LstmAdaBoostLearner

LEARNERS: Dict[str, Type[BaseLearner]] = {
    cls.kind: cls
    for cls in (
        DecisionTreeLearner,
        RandomForestLearner,
        GradientBoostedTreesLearner,
        LstmLearner,
        LstmAdaBoostLearner,
    )
}


def learner_class(kind: str) -> Type[BaseLearner]:
    try:
        return LEARNERS[kind]
    except KeyError:
        raise ConfigError(f"Unknown model kind '{kind}', expected one of {sorted(LEARNERS)}") from None


def create_learner(spec: ModelSpec, root_seed: int = 0) -> BaseLearner:
    """Instantiate the learner described by an experiment's model entry."""
    return learner_class(spec.kind)(spec.name, spec.params, root_seed)


__all__ = [
    'BaseLearner',
    'DecisionTreeLearner',
    'RandomForestLearner',
    'GradientBoostedTreesLearner',
    'LstmLearner',
    'LstmAdaBoostLearner',
    'LEARNERS',
    'learner_class',
    'create_learner'
]
