"""Chi-squared fairness regularizers and their min-max reformulation.

The demographic-parity regularizer is the chi-squared divergence between the
empirical joint of (prediction, sensitive attribute) and the product of its
marginals; the equalized-odds variant conditions everything on the true
label. Training never touches the divergence directly: each sample carries a
concave auxiliary function ``psi`` of a dual matrix W whose dataset average,
maximized over W, recovers the divergence exactly. That equivalence is the
contract the tests enforce.

Index conventions used throughout: W has shape (k, l) = (sensitive classes,
prediction classes); empirical joints have shape (l, k); for a sample with
attribute s and soft predictions F,

    psi(theta, W) = -sum_{r,u} W[r,u]^2 F_u
                    + 2 sum_u W[s,u] F_u / sqrt(p_S(s)) - 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import SensitiveDistribution, TabularDataset
from .model import ModelParams, predict_probs, predict_probs_batch

DEMOGRAPHIC_PARITY = "demographic_parity"
EQUALIZED_ODDS = "equalized_odds"


@dataclass(frozen=True)
class FairnessSpec:
    """Which independence notion to promote and how hard (lam >= 0)."""

    notion: str = DEMOGRAPHIC_PARITY
    lam: float = 0.0

    def __post_init__(self):
        if self.notion not in (DEMOGRAPHIC_PARITY, EQUALIZED_ODDS):
            raise ValueError(f"unknown fairness notion {self.notion!r}")
        if self.lam < 0:
            raise ValueError("fairness weight must be nonnegative")


@dataclass
class DualMatrix:
    """Dual iterate W (k, l) constrained to the Frobenius ball of radius ``diameter``."""

    W: np.ndarray
    diameter: float

    def project(self) -> "DualMatrix":
        return DualMatrix(W=project_frobenius(self.W, self.diameter), diameter=self.diameter)


@dataclass
class EmpiricalJoint:
    """Empirical joint of (prediction class, sensitive class), plus marginals.

    Marginals are the row/column sums of the joint, so they are consistent by
    construction. For equalized odds, ``per_label`` stacks one conditional
    joint per true label and ``label_marginal`` holds the label frequencies.
    """

    joint: np.ndarray
    pred_marginal: np.ndarray
    sens_marginal: np.ndarray
    per_label: np.ndarray | None = None
    label_marginal: np.ndarray | None = None


def project_frobenius(W: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the Frobenius ball of the given radius."""
    if not radius > 0:
        raise ValueError("projection radius must be positive")
    W = np.asarray(W, dtype=float)
    norm = float(np.linalg.norm(W))
    if norm <= radius:
        return W
    return W * (radius / norm)


def _joint(weights_lk: np.ndarray) -> EmpiricalJoint:
    return EmpiricalJoint(
        joint=weights_lk,
        pred_marginal=weights_lk.sum(axis=1),
        sens_marginal=weights_lk.sum(axis=0),
    )


def joint_from_soft_predictions(probs: np.ndarray, sensitive: np.ndarray, k: int) -> EmpiricalJoint:
    """Joint built from expected one-hot predictions: J[u, r] = mean_i F_u(x_i) 1{s_i=r}."""
    probs = np.asarray(probs, dtype=float)
    onehot = np.eye(k)[np.asarray(sensitive, dtype=int)]
    return _joint(probs.T @ onehot / probs.shape[0])


def joint_from_hard_predictions(
    predictions: np.ndarray, sensitive: np.ndarray, k: int, l: int
) -> EmpiricalJoint:
    """Joint of observed (hard prediction, sensitive attribute) pairs."""
    predictions = np.asarray(predictions, dtype=int)
    counts = np.zeros((l, k))
    np.add.at(counts, (predictions, np.asarray(sensitive, dtype=int)), 1.0)
    return _joint(counts / predictions.shape[0])


def conditional_joint(
    probs_or_preds: np.ndarray,
    sensitive: np.ndarray,
    labels: np.ndarray,
    k: int,
    l: int,
    hard: bool = False,
) -> EmpiricalJoint:
    """Per-label conditional joints for the equalized-odds divergence."""
    labels = np.asarray(labels, dtype=int)
    n = labels.shape[0]
    label_counts = np.bincount(labels, minlength=l)
    if (label_counts == 0).any():
        raise ValueError("every label class must appear to condition on it")
    slices = []
    for y in range(l):
        mask = labels == y
        if hard:
            sub = joint_from_hard_predictions(probs_or_preds[mask], sensitive[mask], k, l)
        else:
            sub = joint_from_soft_predictions(probs_or_preds[mask], sensitive[mask], k)
        slices.append(sub.joint)
    marginal_joint = sum(c / n * j for c, j in zip(label_counts, slices))
    base = _joint(marginal_joint)
    base.per_label = np.stack(slices)
    base.label_marginal = label_counts / n
    return base


def _chi2(joint: np.ndarray, pred_marginal: np.ndarray, sens_marginal: np.ndarray) -> float:
    denom = np.outer(pred_marginal, sens_marginal)
    zero = denom == 0
    if (np.abs(joint[zero]) > 0).any():
        raise ValueError("joint has mass on cells with zero marginal probability")
    ratio = np.zeros_like(joint)
    np.divide(joint**2, denom, out=ratio, where=~zero)
    return float(ratio.sum() - 1.0)


def chi2_dem_parity(joint: EmpiricalJoint) -> float:
    """sum_{u,r} J[u,r]^2 / (p_pred(u) p_sens(r)) - 1; zero iff independence."""
    return _chi2(joint.joint, joint.pred_marginal, joint.sens_marginal)


def chi2_eq_odds(joint: EmpiricalJoint) -> float:
    """Label-weighted conditional chi-squared; zero iff conditional independence."""
    if joint.per_label is None or joint.label_marginal is None:
        raise ValueError("equalized-odds divergence needs per-label conditional joints")
    total = 0.0
    for p_y, slice_joint in zip(joint.label_marginal, joint.per_label):
        if p_y == 0:
            continue
        total += p_y * (_chi2(slice_joint, slice_joint.sum(axis=1), slice_joint.sum(axis=0)) + 1.0)
    return float(total - 1.0)


# ---------------------------------------------------------------------------
# Per-sample min-max summand and its gradients
# ---------------------------------------------------------------------------


def psi(
    params: ModelParams, W: np.ndarray, x: np.ndarray, s: int, dist: SensitiveDistribution
) -> float:
    """Concave-in-W auxiliary value whose dataset average maximizes to the divergence."""
    if not dist.rho > 0:
        raise ValueError("sensitive distribution must have strictly positive entries")
    F = predict_probs(params, x)
    quad = float(F @ (W**2).sum(axis=0))
    cross = 2.0 * dist.inv_sqrt_diag[s] * float(W[s] @ F)
    return -quad + cross - 1.0


def psi_grads(
    params: ModelParams, W: np.ndarray, x: np.ndarray, s: int, dist: SensitiveDistribution
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of ``psi`` in the flat model parameters and in W."""
    F = predict_probs(params, x)
    inv = dist.inv_sqrt_diag
    # d psi / d F_u, contracted through the softmax Jacobian
    c = -(W**2).sum(axis=0) + 2.0 * inv[s] * W[s]
    Ac = F * c - F * float(F @ c)
    grad_theta = np.concatenate([np.outer(Ac, x).ravel(), Ac])
    grad_W = -2.0 * W * F[None, :]
    grad_W[s] += 2.0 * inv[s] * F
    return grad_theta, grad_W


def psi_batch(
    params: ModelParams, W: np.ndarray, X: np.ndarray, s: np.ndarray, dist: SensitiveDistribution
) -> np.ndarray:
    """Vector of per-sample psi values."""
    F = predict_probs_batch(params, X)
    s = np.asarray(s, dtype=int)
    quad = F @ (W**2).sum(axis=0)
    cross = 2.0 * dist.inv_sqrt_diag[s] * np.einsum("nl,nl->n", W[s], F)
    return -quad + cross - 1.0


def psi_batch_grads(
    params: ModelParams, W: np.ndarray, X: np.ndarray, s: np.ndarray, dist: SensitiveDistribution
) -> tuple[np.ndarray, np.ndarray]:
    """Batch means of the psi gradients (flat theta gradient, W gradient)."""
    X = np.asarray(X, dtype=float)
    s = np.asarray(s, dtype=int)
    n = X.shape[0]
    F = predict_probs_batch(params, X)
    inv = dist.inv_sqrt_diag
    c = -(W**2).sum(axis=0)[None, :] + 2.0 * inv[s, None] * W[s]
    G = F * c - F * np.einsum("nl,nl->n", F, c)[:, None]
    grad_theta = np.concatenate([(G.T @ X / n).ravel(), G.sum(axis=0) / n])
    onehot = np.eye(dist.probs.shape[0])[s]
    pair_mean = onehot.T @ F / n
    grad_W = -2.0 * W * F.mean(axis=0)[None, :] + 2.0 * inv[:, None] * pair_mean
    return grad_theta, grad_W


def inner_maximizer(
    params: ModelParams,
    dataset: TabularDataset,
    dist: SensitiveDistribution,
    D: float,
    tol: float = 1e-8,
    max_iter: int = 100_000,
) -> DualMatrix:
    """Maximize the dataset-average psi over the radius-D ball.

    Projected gradient ascent with step 1/(2 max_u mean F_u); stops when the
    projected-gradient norm drops below ``tol``. When the unconstrained
    maximizer is interior, the result satisfies the first-order condition.
    """
    if dataset.n == 0:
        raise ValueError("dataset must be nonempty")
    F = predict_probs_batch(params, dataset.features)
    f_mean = F.mean(axis=0)
    onehot = np.eye(dataset.k)[dataset.sensitive]
    B = dist.inv_sqrt_diag[:, None] * (onehot.T @ F / dataset.n)
    step = 1.0 / (2.0 * float(f_mean.max()))
    W = np.zeros((dataset.k, params.n_classes))
    for _ in range(max_iter):
        grad = -2.0 * W * f_mean[None, :] + 2.0 * B
        W_next = project_frobenius(W + step * grad, D)
        gap = float(np.linalg.norm(W_next - W)) / step
        W = W_next
        if gap <= tol:
            return DualMatrix(W=W, diameter=D)
    raise RuntimeError(
        f"inner maximizer did not reach tolerance {tol} in {max_iter} iterations; "
        "the averaged prediction probabilities are likely ill-conditioned"
    )


def fermi_objective(
    params: ModelParams,
    spec: FairnessSpec,
    dataset: TabularDataset,
    dist: SensitiveDistribution | None = None,
) -> float:
    """Mean cross-entropy plus lam times the soft-prediction divergence."""
    from .model import mean_loss_and_grad

    loss, _ = mean_loss_and_grad(params, dataset.features, dataset.labels)
    if spec.lam == 0.0:
        return loss
    probs = predict_probs_batch(params, dataset.features)
    if spec.notion == DEMOGRAPHIC_PARITY:
        value = chi2_dem_parity(joint_from_soft_predictions(probs, dataset.sensitive, dataset.k))
    else:
        value = chi2_eq_odds(
            conditional_joint(probs, dataset.sensitive, dataset.labels, dataset.k, dataset.l)
        )
    return loss + spec.lam * value


# ---------------------------------------------------------------------------
# Equalized-odds variant: one dual matrix per true label
# ---------------------------------------------------------------------------


def psi_eo_batch_grads(
    params: ModelParams,
    W_stack: np.ndarray,
    X: np.ndarray,
    s: np.ndarray,
    y: np.ndarray,
    dists: list[SensitiveDistribution],
) -> tuple[np.ndarray, np.ndarray]:
    """Batch-mean gradients for the label-conditioned objective.

    ``W_stack`` has shape (l, k, l): sample i interacts only with slab y_i
    and with the sensitive distribution of its label slice, so the stacked
    dual gradient is sparse across slabs; averaging over a uniformly drawn
    batch keeps it an unbiased estimate of the full stacked gradient.
    """
    X = np.asarray(X, dtype=float)
    s = np.asarray(s, dtype=int)
    y = np.asarray(y, dtype=int)
    n = X.shape[0]
    F = predict_probs_batch(params, X)
    inv_by_label = np.stack([d.inv_sqrt_diag for d in dists])
    inv_vals = inv_by_label[y, s]
    W_sq_sums = (W_stack**2).sum(axis=1)
    c = -W_sq_sums[y] + 2.0 * inv_vals[:, None] * W_stack[y, s, :]
    G = F * c - F * np.einsum("nl,nl->n", F, c)[:, None]
    grad_theta = np.concatenate([(G.T @ X / n).ravel(), G.sum(axis=0) / n])
    grad_stack = np.zeros_like(W_stack)
    for label in range(W_stack.shape[0]):
        mask = y == label
        if not mask.any():
            continue
        F_slice = F[mask]
        s_slice = s[mask]
        onehot = np.eye(W_stack.shape[1])[s_slice]
        pair = onehot.T @ F_slice
        grad_stack[label] = (
            -2.0 * W_stack[label] * F_slice.sum(axis=0)[None, :]
            + 2.0 * inv_by_label[label][:, None] * pair
        ) / n
    return grad_theta, grad_stack


def eo_inner_maximizer(
    params: ModelParams,
    dataset: TabularDataset,
    dists: list[SensitiveDistribution],
    D: float,
    tol: float = 1e-8,
) -> np.ndarray:
    """Slab-wise maximizer of the label-conditioned average psi (each slab in its own ball)."""
    slabs = []
    for label in range(dataset.l):
        subset = dataset.subset(dataset.labels == label)
        slabs.append(inner_maximizer(params, subset, dists[label], D, tol=tol).W)
    return np.stack(slabs)
