"""
Single LSTM classifier, trained with uniform sample weights.
"""

from typing import Dict, List, Optional

from core import lstm
from core.boosting import init_weights
from core.config import TrainConfig
from core.lstm import SequenceLayout
from core.serialization import layout_from_payload, layout_to_payload

from .base_learner import BaseLearner


class LstmLearner(BaseLearner):
    """The plain LSTM baseline on standardized features."""

    kind = "lstm"
    config_class = TrainConfig
    needs_scaling = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.losses: List[float] = []
        self.layout: Optional[SequenceLayout] = None

    def _fit(self, trainset):
        self.layout = SequenceLayout.canonical(trainset.n_features)
        result = lstm.train_with_history(self.config, trainset, init_weights(trainset.n_samples), self.layout)
        self.losses = result.losses
        return result.params

    def _predict(self, matrix):
        return lstm.predict(self.model, matrix, self.layout)

    def to_payload(self) -> Dict:
        return {
            "config": self.config.model_dump(mode="json"),
            "layout": layout_to_payload(self.layout),
            "params": self.model.to_payload(),
            "losses": list(self.losses),
        }

    def load_payload(self, payload: Dict) -> None:
        params = lstm.LstmParams.from_payload(payload["params"])
        layout = layout_from_payload(payload["layout"])
        config = TrainConfig.model_validate(payload["config"])
        if params.input_size != layout.D or params.hidden_size != config.hidden_size:
            raise ValueError(
                f"LSTM payload disagrees with itself: H={params.hidden_size}, D={params.input_size}, "
                f"layout D={layout.D}, config hidden_size={config.hidden_size}"
            )
        self.model, self.layout, self.config = params, layout, config
        self.losses = list(payload.get("losses", []))

    def describe(self) -> Dict:
        summary = {"hidden_size": self.model.hidden_size, "epochs": self.config.epochs, "steps": self.layout.T}
        if self.losses:
            summary["final_loss"] = round(self.losses[-1], 6)
        return summary
