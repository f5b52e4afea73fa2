"""
Tree-family learners: sample-weighted CART, bootstrap random forest and a
second-order regularized gradient-boosted-tree classifier.

Split candidates are midpoints between consecutive distinct feature values
at a node. Among equally good candidates the lowest feature index wins,
then the lowest threshold.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from .config import ForestConfig, GbtConfig, TreeConfig
from .dataset import FeatureMatrix, check_weights


TIE_TOL = 1e-12
LOG_ODDS_CLAMP = 1e-6

FeaturePicker = Callable[[], np.ndarray]


@dataclass
class TreeNode:
    """Leaf when both children are None; internal nodes send x left iff x[feature_index] <= threshold."""
    value: float = 0.0
    feature_index: int = -1
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(child.depth() for child in (self.left, self.right) if child is not None)

    def n_nodes(self) -> int:
        if self.is_leaf:
            return 1
        return 1 + sum(child.n_nodes() for child in (self.left, self.right) if child is not None)


def tree_to_preorder(root: TreeNode) -> List[list]:
    """Preorder listing with explicit markers: ["leaf", value] / ["split", feature, threshold]."""
    items = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            items.append(["leaf", float(node.value)])
        else:
            items.append(["split", int(node.feature_index), float(node.threshold)])
            stack.append(node.right)
            stack.append(node.left)
    return items


def tree_from_preorder(items: Sequence[list]) -> TreeNode:
    iterator: Iterator[list] = iter(items)

    def build() -> TreeNode:
        try:
            item = next(iterator)
        except StopIteration:
            raise ValueError("Malformed tree listing: dangling child") from None
        if item[0] == "leaf":
            return TreeNode(value=float(item[1]))
        if item[0] != "split":
            raise ValueError(f"Malformed tree listing: unknown marker {item[0]!r}")
        node = TreeNode(feature_index=int(item[1]), threshold=float(item[2]))
        node.left = build()
        node.right = build()
        return node

    root = build()
    if next(iterator, None) is not None:
        raise ValueError("Malformed tree listing: trailing nodes")
    return root


# ---------------------------------------------------------------------------
# Split criteria
# ---------------------------------------------------------------------------


def gini(weight: np.ndarray, positive: np.ndarray) -> np.ndarray:
    """1 - p0^2 - p1^2 from weight totals; zero-weight sides count as pure."""
    weight = np.asarray(weight, dtype=np.float64)
    positive = np.asarray(positive, dtype=np.float64)
    p1 = np.divide(positive, weight, out=np.zeros_like(weight), where=weight > 0)
    return 1.0 - p1 ** 2 - (1.0 - p1) ** 2


def split_impurity(w_left, p_left, w_right, p_right) -> np.ndarray:
    """Weighted Gini of a split: sum over sides of (W_side / W_node) * gini(side)."""
    total = np.asarray(w_left, dtype=np.float64) + w_right
    return (w_left / total) * gini(w_left, p_left) + (w_right / total) * gini(w_right, p_right)


def gbt_split_gain(g_left, h_left, g_right, h_right, reg_lambda: float, gamma: float) -> np.ndarray:
    """0.5 * [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)] - gamma."""
    g_left = np.asarray(g_left, dtype=np.float64)
    h_left = np.asarray(h_left, dtype=np.float64)
    parent = (g_left + g_right) ** 2 / (h_left + h_right + reg_lambda)
    return 0.5 * (g_left ** 2 / (h_left + reg_lambda) + g_right ** 2 / (h_right + reg_lambda) - parent) - gamma


class _Criterion:
    """Per-tree split scoring; lower scores are better."""

    def __init__(self, config: TreeConfig):
        self.config = config

    def node_weight(self, idx: np.ndarray) -> float:
        raise NotImplementedError

    def leaf_value(self, idx: np.ndarray) -> float:
        raise NotImplementedError

    def is_pure(self, idx: np.ndarray) -> bool:
        return False

    def parent_score(self, idx: np.ndarray) -> float:
        raise NotImplementedError

    def scan(self, idx: np.ndarray, xs: np.ndarray, order: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Scores plus left side weights of every split position (left = first k+1 sorted rows)."""
        raise NotImplementedError

    def accept(self, best: float, parent: float) -> bool:
        raise NotImplementedError


class _GiniCriterion(_Criterion):

    def __init__(self, config: TreeConfig, labels: np.ndarray, weights: np.ndarray):
        super().__init__(config)
        self.labels = labels
        self.weights = weights
        self.positive = weights * labels

    def node_weight(self, idx):
        return float(self.weights[idx].sum())

    def leaf_value(self, idx):
        total = self.weights[idx].sum()
        if total > 0:
            return float(self.positive[idx].sum() / total)
        return float(self.labels[idx].mean())

    def is_pure(self, idx):
        labels = self.labels[idx]
        return bool(np.all(labels == labels[0]))

    def parent_score(self, idx):
        return float(gini(self.weights[idx].sum(), self.positive[idx].sum()))

    def scan(self, idx, xs, order):
        w = self.weights[idx][order]
        p = self.positive[idx][order]
        w_left = np.cumsum(w)[:-1]
        p_left = np.cumsum(p)[:-1]
        w_total, p_total = w.sum(), p.sum()
        w_right = w_total - w_left
        scores = split_impurity(w_left, p_left, w_right, p_total - p_left)
        return scores, w_left, w_right

    def accept(self, best, parent):
        return best < parent - TIE_TOL


class _GainCriterion(_Criterion):

    def __init__(self, config: TreeConfig, grad: np.ndarray, hess: np.ndarray,
                 reg_lambda: float, gamma: float):
        super().__init__(config)
        self.grad = grad
        self.hess = hess
        self.reg_lambda = reg_lambda
        self.gamma = gamma

    def node_weight(self, idx):
        return float(self.hess[idx].sum())

    def leaf_value(self, idx):
        return float(-self.grad[idx].sum() / (self.hess[idx].sum() + self.reg_lambda))

    def parent_score(self, idx):
        return 0.0

    def scan(self, idx, xs, order):
        g = self.grad[idx][order]
        h = self.hess[idx][order]
        g_left = np.cumsum(g)[:-1]
        h_left = np.cumsum(h)[:-1]
        h_right = h.sum() - h_left
        gains = gbt_split_gain(g_left, h_left, g.sum() - g_left, h_right, self.reg_lambda, self.gamma)
        return -gains, h_left, h_right

    def accept(self, best, parent):
        return -best > TIE_TOL


def _best_split(values: np.ndarray, idx: np.ndarray, features: np.ndarray,
                criterion: _Criterion) -> Optional[Tuple[int, float, float]]:
    """Lowest-score candidate, ties to the lowest feature index then the lowest threshold."""
    config = criterion.config
    n = len(idx)
    positions = np.arange(n - 1)
    candidates = []
    for feature in features:
        x = values[idx, feature]
        order = np.argsort(x, kind="mergesort")
        xs = x[order]
        scores, w_left, w_right = criterion.scan(idx, xs, order)
        valid = (xs[:-1] < xs[1:]) \
            & (positions + 1 >= config.min_samples_leaf) \
            & (n - positions - 1 >= config.min_samples_leaf) \
            & (w_left >= config.min_weight_leaf) \
            & (w_right >= config.min_weight_leaf)
        if not valid.any():
            continue
        thresholds = 0.5 * (xs[:-1] + xs[1:])
        candidates.append((int(feature), thresholds[valid], scores[valid]))

    if not candidates:
        return None
    best = min(float(scores.min()) for _, _, scores in candidates)
    for feature, thresholds, scores in candidates:
        hits = np.flatnonzero(scores <= best + TIE_TOL)
        if hits.size:
            # thresholds are ascending within a feature
            k = hits[0]
            return feature, float(thresholds[k]), float(scores[k])
    return None


def _grow(values: np.ndarray, idx: np.ndarray, depth: int, criterion: _Criterion,
          pick_features: FeaturePicker) -> TreeNode:
    config = criterion.config
    leaf = TreeNode(value=criterion.leaf_value(idx))
    if config.max_depth is not None and depth >= config.max_depth:
        return leaf
    if len(idx) < 2 * config.min_samples_leaf or criterion.is_pure(idx):
        return leaf
    if criterion.node_weight(idx) < 2 * config.min_weight_leaf:
        return leaf

    found = _best_split(values, idx, pick_features(), criterion)
    if found is None or not criterion.accept(found[2], criterion.parent_score(idx)):
        return leaf

    feature, threshold, _ = found
    goes_left = values[idx, feature] <= threshold
    left_idx, right_idx = idx[goes_left], idx[~goes_left]
    if len(left_idx) == 0 or len(right_idx) == 0:
        raise RuntimeError("empty child node during tree growth")
    return TreeNode(
        value=leaf.value,
        feature_index=feature,
        threshold=threshold,
        left=_grow(values, left_idx, depth + 1, criterion, pick_features),
        right=_grow(values, right_idx, depth + 1, criterion, pick_features),
    )


def _normalized_weights(weights: Optional[np.ndarray], n: int) -> np.ndarray:
    if weights is None:
        return np.full(n, 1.0 / n)
    weights = check_weights(weights, n, normalized=False)
    return weights / weights.sum()


# ---------------------------------------------------------------------------
# CART
# ---------------------------------------------------------------------------


def tree_fit(data: FeatureMatrix, weights: Optional[np.ndarray] = None,
             config: Optional[TreeConfig] = None,
             pick_features: Optional[FeaturePicker] = None) -> TreeNode:
    """
    Greedy weighted-Gini CART.

    Args:
        data: Training rows
        weights: Sample weights (renormalized to sum 1; uniform when omitted)
        config: Growth limits
        pick_features: Candidate-feature draw per node (all features when omitted)

    Returns:
        Root node; leaf values are weighted positive-class proportions
    """
    config = config or TreeConfig()
    if data.n_samples < 1:
        raise ValueError("tree_fit needs at least one row")
    w = _normalized_weights(weights, data.n_samples)
    all_features = np.arange(data.n_features)
    pick = pick_features or (lambda: all_features)
    criterion = _GiniCriterion(config, data.labels.astype(np.float64), w)
    return _grow(data.values, np.arange(data.n_samples), 0, criterion, pick)


def tree_scores(root: TreeNode, values: np.ndarray) -> np.ndarray:
    """Leaf value reached by every row."""
    values = np.asarray(values, dtype=np.float64)
    out = np.empty(values.shape[0])
    stack = [(root, np.arange(values.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if node.is_leaf:
            out[idx] = node.value
            continue
        if node.left is None or node.right is None:
            raise ValueError("Malformed tree: internal node with a dangling child")
        if not 0 <= node.feature_index < values.shape[1]:
            raise ValueError(f"Tree splits on feature {node.feature_index} but rows have {values.shape[1]}")
        goes_left = values[idx, node.feature_index] <= node.threshold
        stack.append((node.left, idx[goes_left]))
        stack.append((node.right, idx[~goes_left]))
    return out


def tree_predict(root: TreeNode, matrix: FeatureMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """(labels, probabilities); label = 1 iff leaf value >= 0.5."""
    probs = tree_scores(root, matrix.values)
    return (probs >= 0.5).astype(np.int64), probs


# ---------------------------------------------------------------------------
# Random forest
# ---------------------------------------------------------------------------


@dataclass
class ForestModel:
    trees: List[TreeNode]
    m_try: int
    n_trees: int
    seed: int


def _fit_forest_tree(data: FeatureMatrix, config: ForestConfig, m_try: int,
                     seed_seq: np.random.SeedSequence) -> TreeNode:
    rng = np.random.default_rng(seed_seq)
    n, n_features = data.n_samples, data.n_features
    rows = rng.integers(0, n, n) if config.bootstrap else np.arange(n)

    def pick() -> np.ndarray:
        return np.sort(rng.choice(n_features, size=m_try, replace=False))

    return tree_fit(data.take(rows), None, config.tree, pick)


def forest_fit(data: FeatureMatrix, config: Optional[ForestConfig] = None) -> ForestModel:
    """
    Bootstrap forest with a fresh m_try-feature draw at every node.

    Each tree consumes its own spawned seed stream, so trees may be fitted
    on a thread pool without changing the result.

    Args:
        data: Training rows
        config: Forest settings (m_try defaults to ceil(sqrt(F)))

    Returns:
        ForestModel
    """
    config = config or ForestConfig()
    n_features = data.n_features
    m_try = config.m_try or max(1, math.ceil(math.sqrt(n_features)))
    if m_try > n_features:
        raise ValueError(f"m_try={m_try} exceeds the {n_features} available features")

    streams = np.random.SeedSequence(config.seed).spawn(config.n_trees)
    logger.info(f"Fitting random forest: {config.n_trees} trees, m_try={m_try}, n_jobs={config.n_jobs}")
    trees = Parallel(n_jobs=config.n_jobs, prefer="threads")(
        delayed(_fit_forest_tree)(data, config, m_try, s) for s in streams
    )
    return ForestModel(trees=trees, m_try=m_try, n_trees=config.n_trees, seed=config.seed)


def forest_predict(model: ForestModel, matrix: FeatureMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Mean leaf probability over trees; label = 1 iff mean >= 0.5."""
    if not model.trees:
        raise ValueError("Forest has no trees")
    probs = np.mean([tree_scores(tree, matrix.values) for tree in model.trees], axis=0)
    return (probs >= 0.5).astype(np.int64), probs


# ---------------------------------------------------------------------------
# Gradient-boosted trees
# ---------------------------------------------------------------------------


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def log_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    p = np.clip(probs, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(labels * np.log(p) + (1 - labels) * np.log(1 - p)))


@dataclass
class GbtModel:
    """prediction = sigmoid(base_score + eta * sum of tree scores)."""
    trees: List[TreeNode]
    eta: float
    reg_lambda: float
    gamma: float
    base_score: float
    train_log_loss: List[float] = field(default_factory=list)

    def margin(self, values: np.ndarray) -> np.ndarray:
        margin = np.full(np.asarray(values).shape[0], self.base_score)
        for tree in self.trees:
            margin = margin + self.eta * tree_scores(tree, values)
        return margin


def gbt_fit(data: FeatureMatrix, config: Optional[GbtConfig] = None) -> GbtModel:
    """
    Binomial log-loss boosting with second-order (gradient and hessian) trees.

    Args:
        data: Training rows
        config: Rounds, shrinkage eta, L2 leaf penalty lambda, split penalty gamma and an
                optional fixed base_score (default: clamped log-odds of the positive rate)

    Returns:
        GbtModel with the per-round training log-loss history
    """
    config = config or GbtConfig()
    y = data.labels.astype(np.float64)
    base_score = config.base_score
    if base_score is None:
        rate = min(max(float(y.mean()), LOG_ODDS_CLAMP), 1.0 - LOG_ODDS_CLAMP)
        base_score = math.log(rate / (1.0 - rate))

    model = GbtModel([], config.eta, config.reg_lambda, config.gamma, float(base_score))
    margin = np.full(data.n_samples, model.base_score)
    all_features = np.arange(data.n_features)
    model.train_log_loss.append(log_loss(_sigmoid(margin), y))

    for round_index in range(config.n_rounds):
        p = _sigmoid(margin)
        criterion = _GainCriterion(config.tree, p - y, p * (1.0 - p), config.reg_lambda, config.gamma)
        tree = _grow(data.values, np.arange(data.n_samples), 0, criterion, lambda: all_features)
        model.trees.append(tree)
        margin = margin + config.eta * tree_scores(tree, data.values)
        model.train_log_loss.append(log_loss(_sigmoid(margin), y))

    logger.info(
        f"GBT fitted {config.n_rounds} rounds: train log-loss "
        f"{model.train_log_loss[0]:.4f} -> {model.train_log_loss[-1]:.4f}"
    )
    return model


def gbt_predict(model: GbtModel, matrix: FeatureMatrix) -> Tuple[np.ndarray, np.ndarray]:
    probs = _sigmoid(model.margin(matrix.values))
    return (probs >= 0.5).astype(np.int64), probs
