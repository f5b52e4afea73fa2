"""
From-scratch LSTM binary classifier.

Each standardized feature vector is unrolled as a length-F sequence of
scalars (D = 1) in canonical feature order; the last hidden state feeds a
logistic output head. Training is deterministic full-batch gradient descent
on a sample-weighted cross-entropy, with gradients from backpropagation
through time.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .config import TrainConfig
from .dataset import FeatureMatrix, check_weights
from .exceptions import TrainingError
from tools.io_tools import IOTools


PROB_EPS = 1e-12
FORGET_BIAS = 1.0

GATE_WEIGHTS = ("W_f", "W_i", "W_c", "W_o")
BLOCK_ORDER = ("W_f", "W_i", "W_c", "W_o", "b_f", "b_i", "b_c", "b_o", "w_out", "b_out")


def sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form does not overflow for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass(frozen=True)
class SequenceLayout:
    """Feature-unrolled sequence: step t reads feature order[t] as a scalar input."""
    order: Tuple[int, ...]
    mode: str = "feature-unrolled"

    @classmethod
    def canonical(cls, n_features: int) -> "SequenceLayout":
        return cls(tuple(range(n_features)))

    @property
    def T(self) -> int:
        return len(self.order)

    @property
    def D(self) -> int:
        return 1

    def to_sequence(self, values: np.ndarray) -> np.ndarray:
        """(N, F) matrix -> (T, N, 1) sequence."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != self.T:
            raise ValueError(f"layout expects {self.T} features, got shape {values.shape}")
        return values[:, list(self.order)].T[:, :, None]


@dataclass
class LstmParams:
    """
    Gate weights act on the concatenation [h_{t-1}, x_t] (H + D columns).
    Gradients use the same container.
    """
    W_f: np.ndarray
    W_i: np.ndarray
    W_c: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray  # 0-d

    @property
    def hidden_size(self) -> int:
        return self.W_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_f.shape[1] - self.W_f.shape[0]

    def blocks(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in BLOCK_ORDER}

    @classmethod
    def from_blocks(cls, blocks: Dict[str, np.ndarray]) -> "LstmParams":
        return cls(**{name: np.array(blocks[name], dtype=np.float64) for name in BLOCK_ORDER})

    @classmethod
    def zeros(cls, hidden_size: int, input_size: int = 1) -> "LstmParams":
        H, D = hidden_size, input_size
        blocks = {name: np.zeros((H, H + D)) for name in GATE_WEIGHTS}
        blocks.update({name: np.zeros(H) for name in ("b_f", "b_i", "b_c", "b_o", "w_out")})
        blocks["b_out"] = np.zeros(())
        return cls.from_blocks(blocks)

    @classmethod
    def initialize(cls, hidden_size: int, input_size: int,
                   rng: np.random.Generator, init_scale: float) -> "LstmParams":
        """
        Uniform [-init_scale, init_scale] weights; b_f = 1, other biases 0.

        Draw order: W_f, W_i, W_c, W_o, w_out.
        """
        params = cls.zeros(hidden_size, input_size)
        for name in GATE_WEIGHTS:
            setattr(params, name, rng.uniform(-init_scale, init_scale, getattr(params, name).shape))
        params.w_out = rng.uniform(-init_scale, init_scale, hidden_size)
        params.b_f = np.full(hidden_size, FORGET_BIAS)
        return params

    def copy(self) -> "LstmParams":
        return LstmParams.from_blocks(self.blocks())

    def axpy(self, alpha: float, other: "LstmParams") -> "LstmParams":
        """self + alpha * other, as a new object."""
        mine, theirs = self.blocks(), other.blocks()
        return LstmParams.from_blocks({name: mine[name] + alpha * theirs[name] for name in BLOCK_ORDER})

    def scaled(self, factor: float) -> "LstmParams":
        return LstmParams.from_blocks({name: factor * block for name, block in self.blocks().items()})

    def global_norm(self) -> float:
        return math.sqrt(math.fsum(float(np.sum(block * block)) for block in self.blocks().values()))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(block)) for block in self.blocks().values())

    def to_payload(self) -> Dict:
        """Blocks as [name, shape, flat values] triples in declared order."""
        return {
            "hidden_size": self.hidden_size,
            "input_size": self.input_size,
            "blocks": [
                [name, list(block.shape), block.ravel().tolist()]
                for name, block in self.blocks().items()
            ],
        }

    @classmethod
    def from_payload(cls, payload: Dict) -> "LstmParams":
        blocks = {
            name: np.array(values, dtype=np.float64).reshape(shape)
            for name, shape, values in payload["blocks"]
        }
        missing = set(BLOCK_ORDER) - set(blocks)
        if missing:
            raise ValueError(f"LSTM payload is missing blocks {sorted(missing)}")
        return cls.from_blocks(blocks)

    def fingerprint(self) -> str:
        return IOTools.fingerprint(self.to_payload())


@dataclass
class GateCache:
    """Activations of one step (batched along the first axis when N > 1)."""
    z: np.ndarray       # [h_prev, x_t]
    c_prev: np.ndarray
    f: np.ndarray
    i: np.ndarray
    g: np.ndarray       # candidate cell value
    o: np.ndarray
    c: np.ndarray
    h: np.ndarray


def cell_step(params: LstmParams, x_t: np.ndarray, h_prev: np.ndarray,
              c_prev: np.ndarray) -> Tuple[np.ndarray, np.ndarray, GateCache]:
    """
    One LSTM step.

    Args:
        params: Cell parameters
        x_t: Input, shape (D,) or (N, D)
        h_prev: Previous hidden state, shape (H,) or (N, H)
        c_prev: Previous cell state, same shape as h_prev

    Returns:
        (h_t, c_t, cache)
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    H, D = params.hidden_size, params.input_size
    if x_t.shape[-1] != D or h_prev.shape[-1] != H or c_prev.shape != h_prev.shape \
            or x_t.shape[:-1] != h_prev.shape[:-1]:
        raise ValueError(
            f"cell_step dimension mismatch: x {x_t.shape}, h {h_prev.shape}, c {c_prev.shape} "
            f"for H={H}, D={D}"
        )

    z = np.concatenate([h_prev, x_t], axis=-1)
    f = sigmoid(z @ params.W_f.T + params.b_f)
    i = sigmoid(z @ params.W_i.T + params.b_i)
    g = np.tanh(z @ params.W_c.T + params.b_c)
    o = sigmoid(z @ params.W_o.T + params.b_o)
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(h))):
        raise TrainingError("cell_step produced a non-finite state")
    return h, c, GateCache(z, c_prev, f, i, g, o, c, h)


def forward_batch(params: LstmParams, values: np.ndarray,
                  layout: SequenceLayout) -> Tuple[np.ndarray, List[GateCache]]:
    """
    Run the sequence for every row from h_0 = c_0 = 0.

    Args:
        params: Model parameters
        values: (N, F) standardized features
        layout: Sequence construction

    Returns:
        (probabilities of shape (N,), per-step caches)
    """
    sequence = layout.to_sequence(values)
    n = sequence.shape[1]
    h = np.zeros((n, params.hidden_size))
    c = np.zeros((n, params.hidden_size))
    caches = []
    for x_t in sequence:
        h, c, cache = cell_step(params, x_t, h, c)
        caches.append(cache)
    logits = h @ params.w_out + params.b_out
    probs = sigmoid(logits)
    if not np.all(np.isfinite(probs)):
        raise TrainingError("forward produced a non-finite probability")
    return probs, caches


def forward(params: LstmParams, sample: np.ndarray, layout: SequenceLayout) -> float:
    """Probability of the positive class for one F-vector."""
    sample = np.asarray(sample, dtype=np.float64)
    probs, _ = forward_batch(params, sample.reshape(1, -1), layout)
    return float(probs[0])


def _check_aligned(n: int, labels: np.ndarray, weights: np.ndarray):
    if labels.shape != (n,) or weights.shape != (n,):
        raise ValueError(f"length mismatch: {n} predictions, {labels.shape[0]} labels, {weights.shape[0]} weights")


def weighted_loss(probs: np.ndarray, labels: np.ndarray, weights: np.ndarray) -> float:
    """
    Sum over samples of w_i times the binary cross-entropy, with probabilities
    clamped into [PROB_EPS, 1 - PROB_EPS]. Weights are used as given.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    _check_aligned(probs.shape[0], labels, weights)
    p = np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)
    losses = -(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p))
    return float(np.dot(weights, losses))


def loss_and_gradient(params: LstmParams, values: np.ndarray, labels: np.ndarray,
                      weights: np.ndarray, layout: SequenceLayout) -> Tuple[float, LstmParams]:
    """
    Weighted loss over the batch and its exact gradient by BPTT.

    Args:
        params: Model parameters
        values: (N, F) features
        labels: N binary labels
        weights: N sample weights
        layout: Sequence construction

    Returns:
        (loss, gradient with the shape of params)
    """
    labels = np.asarray(labels, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    probs, caches = forward_batch(params, values, layout)
    _check_aligned(probs.shape[0], labels, weights)
    loss = weighted_loss(probs, labels, weights)

    H = params.hidden_size
    grads = LstmParams.zeros(H, params.input_size)
    d_logit = weights * (probs - labels)                     # (N,)
    h_last = caches[-1].h if caches else np.zeros((probs.shape[0], H))
    grads.w_out = h_last.T @ d_logit
    grads.b_out = np.array(d_logit.sum())

    dh = np.outer(d_logit, params.w_out)                     # (N, H)
    dc = np.zeros_like(dh)
    gate_grads = {name: np.zeros_like(getattr(params, name)) for name in GATE_WEIGHTS}
    bias_grads = {name: np.zeros(H) for name in ("b_f", "b_i", "b_c", "b_o")}

    for cache in reversed(caches):
        tanh_c = np.tanh(cache.c)
        d_o = dh * tanh_c
        dc = dc + dh * cache.o * (1.0 - tanh_c ** 2)
        d_f = dc * cache.c_prev
        d_i = dc * cache.g
        d_g = dc * cache.i

        pre = {
            "f": d_f * cache.f * (1.0 - cache.f),
            "i": d_i * cache.i * (1.0 - cache.i),
            "c": d_g * (1.0 - cache.g ** 2),
            "o": d_o * cache.o * (1.0 - cache.o),
        }
        dz = np.zeros_like(cache.z)
        for gate, d_pre in pre.items():
            gate_grads[f"W_{gate}"] += d_pre.T @ cache.z
            bias_grads[f"b_{gate}"] += d_pre.sum(axis=0)
            dz += d_pre @ getattr(params, f"W_{gate}")

        dh = dz[:, :H]
        dc = dc * cache.f

    for name, block in {**gate_grads, **bias_grads}.items():
        setattr(grads, name, block)

    for name, block in grads.blocks().items():
        if not np.all(np.isfinite(block)):
            raise TrainingError(f"Non-finite gradient in parameter block {name}")
    return loss, grads


def backward(params: LstmParams, batch: FeatureMatrix, weights: np.ndarray,
             layout: SequenceLayout) -> LstmParams:
    """Gradient of the weighted loss over `batch` with respect to every parameter."""
    _, grads = loss_and_gradient(params, batch.values, batch.labels, weights, layout)
    return grads


@dataclass
class TrainResult:
    params: LstmParams
    losses: List[float] = field(default_factory=list)
    initial: Optional[LstmParams] = None


def train_with_history(config: TrainConfig, trainset: FeatureMatrix, weights: np.ndarray,
                       layout: Optional[SequenceLayout] = None) -> TrainResult:
    """
    Full-batch gradient descent with global-norm clipping.

    Args:
        config: Trainer settings
        trainset: Standardized training rows
        weights: Sample weights aligned with the rows
        layout: Sequence construction (canonical order by default)

    Returns:
        TrainResult with final params and the loss before each step
    """
    layout = layout or SequenceLayout.canonical(trainset.n_features)
    weights = check_weights(weights, trainset.n_samples)

    rng = np.random.default_rng(config.seed)
    params = LstmParams.initialize(config.hidden_size, layout.D, rng, config.init_scale)
    result = TrainResult(params=params, initial=params.copy())

    for epoch in range(config.epochs):
        loss, grads = loss_and_gradient(params, trainset.values, trainset.labels, weights, layout)
        if not math.isfinite(loss):
            raise TrainingError(f"Non-finite loss at epoch {epoch}")
        norm = grads.global_norm()
        if norm > config.grad_clip:
            grads = grads.scaled(config.grad_clip / norm)
        params = params.axpy(-config.learning_rate, grads)
        if not params.is_finite():
            raise TrainingError(f"Non-finite parameters after epoch {epoch}")
        result.losses.append(loss)

    result.params = params
    logger.debug(
        f"LSTM H={config.hidden_size} trained {config.epochs} epochs: "
        f"loss {result.losses[0]:.4f} -> {result.losses[-1]:.4f}"
    )
    return result


def train(config: TrainConfig, trainset: FeatureMatrix, weights: np.ndarray,
          layout: Optional[SequenceLayout] = None) -> LstmParams:
    """Train one LSTM classifier and return its parameters."""
    return train_with_history(config, trainset, weights, layout).params


def predict(params: LstmParams, matrix: FeatureMatrix,
            layout: Optional[SequenceLayout] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Labels (1 iff probability >= 0.5) and probabilities for every row.
    """
    layout = layout or SequenceLayout.canonical(matrix.n_features)
    if matrix.n_features != layout.T:
        raise ValueError(f"model expects {layout.T} features, matrix has {matrix.n_features}")
    if matrix.n_samples == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    probs, _ = forward_batch(params, matrix.values, layout)
    return (probs >= 0.5).astype(np.int64), probs
