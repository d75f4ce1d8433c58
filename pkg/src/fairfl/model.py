"""Multinomial logistic regression with analytic gradients.

The model owns the parameter flattening convention used everywhere a flat
gradient crosses a module boundary: weight matrix rows first (C order,
class-major), then the bias vector. ``ModelParams.to_vector`` /
``ModelParams.from_vector`` are the only places that encode this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Logistic-regression parameters: class weights (l, d) and biases (l,)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ValueError(f"inconsistent parameter shapes {w.shape} / {b.shape}")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("non-finite model parameters")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    @property
    def dim(self) -> int:
        """Total flat parameter count l*(d+1)."""
        l, d = self.weights.shape
        return l * (d + 1)

    def to_vector(self) -> np.ndarray:
        """Flatten as [W row-major, then bias]."""
        return np.concatenate([self.weights.ravel(), self.bias])

    @classmethod
    def from_vector(cls, vec: np.ndarray, n_features: int, n_classes: int) -> "ModelParams":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (n_classes * (n_features + 1),):
            raise ValueError(f"expected {n_classes * (n_features + 1)} entries, got {vec.shape}")
        w = vec[: n_classes * n_features].reshape(n_classes, n_features)
        return cls(weights=w.copy(), bias=vec[n_classes * n_features :].copy())

    @classmethod
    def zeros(cls, n_features: int, n_classes: int) -> "ModelParams":
        return cls(weights=np.zeros((n_classes, n_features)), bias=np.zeros(n_classes))

    def save(self, path) -> None:
        """Checkpoint to .npz (flat vector plus shape)."""
        np.savez(path, vector=self.to_vector(), shape=np.array(self.weights.shape))

    @classmethod
    def load(cls, path) -> "ModelParams":
        data = np.load(path)
        l, d = (int(v) for v in data["shape"])
        return cls.from_vector(data["vector"], d, l)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted for stability."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def predict_probs(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Class probabilities for a single feature vector; sums to 1."""
    x = np.asarray(x, dtype=float)
    if x.shape != (params.n_features,):
        raise ValueError(f"expected feature vector of length {params.n_features}, got {x.shape}")
    return softmax(params.weights @ x + params.bias)


def predict_probs_batch(params: ModelParams, X: np.ndarray) -> np.ndarray:
    """Class probabilities for a feature matrix (n, d) -> (n, l)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != params.n_features:
        raise ValueError(f"expected (n, {params.n_features}) feature matrix, got {X.shape}")
    return softmax(X @ params.weights.T + params.bias)


def hard_predictions(params: ModelParams, X: np.ndarray) -> np.ndarray:
    """Argmax labels; ties resolve to the lowest class index."""
    return np.argmax(predict_probs_batch(params, X), axis=1)


def loss_and_grad(params: ModelParams, x: np.ndarray, y: int) -> tuple[float, np.ndarray]:
    """Cross-entropy loss and its flat gradient for one example."""
    if not 0 <= y < params.n_classes:
        raise ValueError(f"label {y} out of range for {params.n_classes} classes")
    probs = predict_probs(params, x)
    loss = -np.log(probs[y])
    dlogits = probs.copy()
    dlogits[y] -= 1.0
    grad = np.concatenate([np.outer(dlogits, x).ravel(), dlogits])
    return float(loss), grad


def mean_loss_and_grad(params: ModelParams, X: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and mean flat gradient over a batch."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    n = X.shape[0]
    probs = predict_probs_batch(params, X)
    loss = float(-np.log(probs[np.arange(n), y]).mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    grad_w = dlogits.T @ X / n
    grad_b = dlogits.sum(axis=0) / n
    return loss, np.concatenate([grad_w.ravel(), grad_b])


def probs_jacobian(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Jacobian of the class probabilities w.r.t. the flat parameters.

    Row u holds the gradient of probability u; columns follow the flat
    parameter order. Rows sum to the zero vector since the probabilities
    sum to one.
    """
    x = np.asarray(x, dtype=float)
    probs = predict_probs(params, x)
    l = params.n_classes
    # dF_u / dlogit_v = F_u (delta_uv - F_v)
    A = np.diag(probs) - np.outer(probs, probs)
    jac_w = np.einsum("uv,c->uvc", A, x).reshape(l, l * params.n_features)
    return np.concatenate([jac_w, A], axis=1)
