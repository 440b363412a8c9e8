"""Three-layer feed-forward classifier assigning privacy profiles.

Input layer of L settings, sigmoid hidden layer of M neurons, softmax output
over the profile classes; trained by mini-batch gradient descent on
cross-entropy.  Everything is deterministic given the config seed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DivergenceError, ParameterError, TrainingDataError


@dataclass
class TrainConfig:
    learning_rate: float = 0.3
    epochs: int = 300
    batch_size: int = 32
    seed: int = 0
    hidden_width: int = 32

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs < 1 or self.batch_size < 1:
            raise ParameterError("learning_rate, epochs and batch_size must be positive")
        if self.hidden_width < 1:
            raise ParameterError("hidden_width must be positive")


@dataclass
class NetworkModel:
    w1: np.ndarray  # (L, M)
    b1: np.ndarray  # (M,)
    w2: np.ndarray  # (M, kappa)
    b2: np.ndarray  # (kappa,)
    config: TrainConfig
    loss_history: list[float] = field(default_factory=list)
    feature_aliases: list[str] | None = None

    @property
    def input_width(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_width(self) -> int:
        return self.w1.shape[1]

    @property
    def kappa(self) -> int:
        return self.w2.shape[1]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=-1, keepdims=True)


def _forward(model: NetworkModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = _sigmoid(x @ model.w1 + model.b1)
    return h, _softmax(h @ model.w2 + model.b2)


def _loss(model: NetworkModel, x: np.ndarray, onehot: np.ndarray) -> float:
    h = _sigmoid(x @ model.w1 + model.b1)
    logits = h @ model.w2 + model.b2
    logp = logits - logits.max(axis=1, keepdims=True)
    logp = logp - np.log(np.exp(logp).sum(axis=1, keepdims=True))
    return float(-(onehot * logp).sum(axis=1).mean())


def init_model(
    input_width: int, n_classes: int, config: TrainConfig, feature_aliases: list[str] | None = None
) -> NetworkModel:
    """Fresh model with uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] weights."""
    if n_classes < 2:
        raise ParameterError("need at least 2 classes")
    rng = np.random.default_rng(config.seed)
    m = config.hidden_width
    lim1 = 1.0 / np.sqrt(input_width)
    lim2 = 1.0 / np.sqrt(m)
    return NetworkModel(
        w1=rng.uniform(-lim1, lim1, size=(input_width, m)),
        b1=np.zeros(m),
        w2=rng.uniform(-lim2, lim2, size=(m, n_classes)),
        b2=np.zeros(n_classes),
        config=config,
        feature_aliases=feature_aliases,
    )


def train(
    features: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
    n_classes: int | None = None,
    feature_aliases: list[str] | None = None,
) -> NetworkModel:
    """Mini-batch gradient descent on softmax cross-entropy.

    Loss over the full training set is recorded before training and after
    each epoch in ``model.loss_history``.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != len(y):
        raise ParameterError("features must be (n_examples, width) matching labels")
    if x.shape[0] == 0:
        raise TrainingDataError("empty training set")
    if not np.isfinite(x).all():
        raise TrainingDataError("non-finite feature values")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    present = np.unique(y)
    if present.min() < 0 or present.max() >= n_classes:
        raise TrainingDataError(f"labels outside 0..{n_classes - 1}")
    missing = sorted(set(range(n_classes)) - set(present.tolist()))
    if missing:
        raise TrainingDataError(f"class {missing[0]} absent from training set")

    model = init_model(x.shape[1], n_classes, config, feature_aliases)
    onehot = np.eye(n_classes)[y]
    rng = np.random.default_rng(config.seed)
    n = x.shape[0]
    lr = config.learning_rate
    model.loss_history.append(_loss(model, x, onehot))

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            xb, yb = x[batch], onehot[batch]
            h, probs = _forward(model, xb)
            dlogits = (probs - yb) / len(batch)
            dh = dlogits @ model.w2.T
            dz = dh * h * (1.0 - h)
            model.w2 -= lr * (h.T @ dlogits)
            model.b2 -= lr * dlogits.sum(axis=0)
            model.w1 -= lr * (xb.T @ dz)
            model.b1 -= lr * dz.sum(axis=0)
        loss = _loss(model, x, onehot)
        if not np.isfinite(loss):
            raise DivergenceError(epoch)
        model.loss_history.append(loss)
    return model


def predict_scores(model: NetworkModel, features: np.ndarray) -> np.ndarray:
    """Softmax class scores; (kappa,) for a single vector, (n, kappa) batched."""
    x = np.asarray(features, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.input_width:
        raise ParameterError(f"expected {model.input_width} features, got {x.shape[1]}")
    _, probs = _forward(model, x)
    return probs[0] if single else probs


def predict_label(model: NetworkModel, features: np.ndarray):
    """Argmax class; ties resolve to the lowest class index."""
    scores = predict_scores(model, features)
    if scores.ndim == 1:
        return int(np.argmax(scores))
    return np.argmax(scores, axis=1).astype(np.int64)


# ---------------------------------------------------------------------------
# numerical verification
# ---------------------------------------------------------------------------

def _analytic_gradients(model: NetworkModel, x: np.ndarray, y: int) -> list[np.ndarray]:
    onehot = np.zeros(model.kappa)
    onehot[y] = 1.0
    xb = x[None, :]
    h, probs = _forward(model, xb)
    dlogits = probs - onehot[None, :]
    dh = dlogits @ model.w2.T
    dz = dh * h * (1.0 - h)
    return [xb.T @ dz, dz[0], h.T @ dlogits, dlogits[0]]


def gradient_check(
    model: NetworkModel, features: np.ndarray, label: int, epsilon: float = 1e-5
) -> float:
    """Max relative error between analytic and central finite-difference
    gradients of the single-example loss, over every parameter."""
    x = np.asarray(features, dtype=np.float64)
    onehot = np.zeros((1, model.kappa))
    onehot[0, label] = 1.0
    xb = x[None, :]
    analytic = _analytic_gradients(model, x, label)
    params = [model.w1, model.b1, model.w2, model.b2]
    worst = 0.0
    for grad, param in zip(analytic, params):
        flat_g = np.asarray(grad).ravel()
        flat_p = param.ravel()
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + epsilon
            up = _loss(model, xb, onehot)
            flat_p[i] = orig - epsilon
            down = _loss(model, xb, onehot)
            flat_p[i] = orig
            numeric = (up - down) / (2.0 * epsilon)
            scale = max(abs(flat_g[i]) + abs(numeric), 1e-8)
            worst = max(worst, abs(flat_g[i] - numeric) / scale)
    return worst


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def save_model(model: NetworkModel, path: str | Path) -> str:
    """Write a JSON snapshot; returns its sha256 digest.

    Float round-trip is exact (repr-based JSON floats), so a loaded snapshot
    reproduces predictions bit for bit.
    """
    payload = {
        "input_width": model.input_width,
        "hidden_width": model.hidden_width,
        "kappa": model.kappa,
        "w1": model.w1.ravel().tolist(),
        "b1": model.b1.tolist(),
        "w2": model.w2.ravel().tolist(),
        "b2": model.b2.tolist(),
        "train_config": {
            "learning_rate": model.config.learning_rate,
            "epochs": model.config.epochs,
            "batch_size": model.config.batch_size,
            "seed": model.config.seed,
            "hidden_width": model.config.hidden_width,
        },
        "seed": model.config.seed,
        "loss_history": model.loss_history,
        "feature_aliases": model.feature_aliases,
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_model(path: str | Path) -> NetworkModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    l, m, k = payload["input_width"], payload["hidden_width"], payload["kappa"]
    config = TrainConfig(**payload["train_config"])
    return NetworkModel(
        w1=np.array(payload["w1"]).reshape(l, m),
        b1=np.array(payload["b1"]),
        w2=np.array(payload["w2"]).reshape(m, k),
        b2=np.array(payload["b2"]),
        config=config,
        loss_history=list(payload["loss_history"]),
        feature_aliases=payload["feature_aliases"],
    )


def snapshot_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
