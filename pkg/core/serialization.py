"""
JSON payloads for every model family and the model-file envelope.

Floats are written with their shortest round-trip repr, so loading a payload
restores every parameter bit for bit.
"""

from pathlib import Path
from typing import Any, Dict, Union

from loguru import logger

from .boosting import BoostRound, EnsembleModel
from .exceptions import ConfigError
from .lstm import LstmParams, SequenceLayout
from .trees import ForestModel, GbtModel, TreeNode, tree_from_preorder, tree_to_preorder
from tools.io_tools import IOTools


MODEL_FORMAT = "clickboost-model"
MODEL_FORMAT_VERSION = 1


def tree_to_payload(root: TreeNode) -> Dict:
    return {"nodes": tree_to_preorder(root)}


def tree_from_payload(payload: Dict) -> TreeNode:
    return tree_from_preorder(payload["nodes"])


def forest_to_payload(model: ForestModel) -> Dict:
    return {
        "m_try": model.m_try,
        "n_trees": model.n_trees,
        "seed": model.seed,
        "trees": [tree_to_preorder(tree) for tree in model.trees],
    }


def forest_from_payload(payload: Dict) -> ForestModel:
    trees = [tree_from_preorder(nodes) for nodes in payload["trees"]]
    if len(trees) != payload["n_trees"]:
        raise ValueError(f"Forest payload lists {len(trees)} trees, header says {payload['n_trees']}")
    return ForestModel(trees=trees, m_try=payload["m_try"], n_trees=payload["n_trees"], seed=payload["seed"])


def gbt_to_payload(model: GbtModel) -> Dict:
    return {
        "eta": model.eta,
        "reg_lambda": model.reg_lambda,
        "gamma": model.gamma,
        "base_score": model.base_score,
        "train_log_loss": list(model.train_log_loss),
        "trees": [tree_to_preorder(tree) for tree in model.trees],
    }


def gbt_from_payload(payload: Dict) -> GbtModel:
    return GbtModel(
        trees=[tree_from_preorder(nodes) for nodes in payload["trees"]],
        eta=payload["eta"],
        reg_lambda=payload["reg_lambda"],
        gamma=payload["gamma"],
        base_score=payload["base_score"],
        train_log_loss=list(payload["train_log_loss"]),
    )


def lstm_to_payload(params: LstmParams) -> Dict:
    return params.to_payload()


def lstm_from_payload(payload: Dict) -> LstmParams:
    return LstmParams.from_payload(payload)


def layout_to_payload(layout: SequenceLayout) -> Dict:
    return {"order": list(layout.order), "mode": layout.mode}


def layout_from_payload(payload: Dict) -> SequenceLayout:
    return SequenceLayout(tuple(int(i) for i in payload["order"]), payload["mode"])


def ensemble_to_payload(model: EnsembleModel) -> Dict:
    """Header (learner kind, M, per-round alpha and epsilon) followed by every round's learner."""
    to_learner = lstm_to_payload if model.learner_kind == "lstm" else tree_to_payload
    return {
        "learner_kind": model.learner_kind,
        "n_rounds": model.n_rounds,
        "alphas": [r.alpha for r in model.rounds],
        "epsilons": [r.epsilon for r in model.rounds],
        "layout": layout_to_payload(model.layout) if model.layout is not None else None,
        "scaler_fingerprint": model.scaler_fingerprint,
        "training_errors": list(model.training_errors),
        "learners": [to_learner(r.learner) for r in model.rounds],
    }


def ensemble_from_payload(payload: Dict) -> EnsembleModel:
    kind = payload["learner_kind"]
    if kind not in ("lstm", "tree"):
        raise ValueError(f"Unknown ensemble learner kind: {kind}")
    from_learner = lstm_from_payload if kind == "lstm" else tree_from_payload
    alphas, epsilons, learners = payload["alphas"], payload["epsilons"], payload["learners"]
    if not len(alphas) == len(epsilons) == len(learners) == payload["n_rounds"]:
        raise ValueError("Ensemble payload round counts disagree")
    rounds = [
        BoostRound(from_learner(learner), epsilon, alpha)
        for learner, epsilon, alpha in zip(learners, epsilons, alphas)
    ]
    layout = layout_from_payload(payload["layout"]) if payload.get("layout") else None
    return EnsembleModel(
        rounds=rounds,
        learner_kind=kind,
        layout=layout,
        scaler_fingerprint=payload.get("scaler_fingerprint"),
        training_errors=list(payload.get("training_errors", [])),
    )


def write_model_file(path: Union[str, Path], envelope: Dict[str, Any]) -> Path:
    """
    Write a model envelope atomically.

    Args:
        path: Destination file
        envelope: {name, kind, fingerprints, seeds, model}; format and version are added here

    Returns:
        The written path
    """
    content = {"format": MODEL_FORMAT, "version": MODEL_FORMAT_VERSION, **envelope}
    written = IOTools.atomic_write_json(path, content)
    logger.info(f"Saved model '{envelope.get('name')}' to {written}")
    return written


def read_model_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read and check a model envelope.

    Args:
        path: Model file

    Returns:
        The envelope mapping
    """
    try:
        content = IOTools.read_json(path)
    except (OSError, ValueError) as e:
        raise ConfigError(f"Could not read model file {path}: {e}") from e
    if not isinstance(content, dict) or content.get("format") != MODEL_FORMAT:
        raise ConfigError(f"{path} is not a clickboost model file")
    if content.get("version") != MODEL_FORMAT_VERSION:
        raise ConfigError(f"{path} has unsupported model format version {content.get('version')}")
    return content
