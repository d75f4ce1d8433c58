"""Test-time evaluation: error rate and fairness-violation maxima.

Violations are worst-case gaps between group-conditional prediction rates,
computed from hard predictions. Conditioning cells with no samples are
excluded from the maxima: treating an empty cell as probability zero would
manufacture violations of 1.0 out of thin air.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class EvalReport:
    """One evaluation outcome plus the (sensitive, label) support counts."""

    error: float
    dp_violation: float
    eo_violation: float
    support: np.ndarray


def misclassification_error(predictions: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of predictions that differ from the labels."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape or predictions.size == 0:
        raise ValueError("predictions and labels must be nonempty and aligned")
    return float(np.mean(predictions != labels))


def dem_parity_violation(predictions: np.ndarray, sensitive: np.ndarray) -> float:
    """max over prediction classes and attribute pairs of |P[yhat=y'|s1] - P[yhat=y'|s2]|."""
    predictions = np.asarray(predictions, dtype=int)
    sensitive = np.asarray(sensitive, dtype=int)
    if predictions.shape != sensitive.shape or predictions.size == 0:
        raise ValueError("predictions and sensitive must be nonempty and aligned")
    groups = np.unique(sensitive)
    if groups.size < 2:
        raise ValueError("demographic-parity violation needs at least two sensitive classes")
    worst = 0.0
    for y in np.unique(predictions):
        rates = np.array([np.mean(predictions[sensitive == g] == y) for g in groups])
        worst = max(worst, float(rates.max() - rates.min()))
    return worst


def eq_odds_violation(
    predictions: np.ndarray, sensitive: np.ndarray, labels: np.ndarray
) -> float:
    """Worst conditional-rate gap over both the y = y' and y != y' branches.

    For each candidate class y' and each branch, the gap is taken over the
    sensitive groups whose conditioning cell is nonempty; branches with fewer
    than two populated cells contribute nothing.
    """
    predictions = np.asarray(predictions, dtype=int)
    sensitive = np.asarray(sensitive, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if not predictions.shape == sensitive.shape == labels.shape or predictions.size == 0:
        raise ValueError("inputs must be nonempty and aligned")
    groups = np.unique(sensitive)
    classes = np.union1d(np.unique(predictions), np.unique(labels))
    worst = None
    for y in classes:
        for branch_mask in (labels == y, labels != y):
            rates = []
            for g in groups:
                cell = branch_mask & (sensitive == g)
                if cell.any():
                    rates.append(np.mean(predictions[cell] == y))
            if len(rates) >= 2:
                gap = float(max(rates) - min(rates))
                worst = gap if worst is None else max(worst, gap)
    if worst is None:
        raise ValueError("no pair of populated conditioning cells exists")
    return worst


def support_counts(sensitive: np.ndarray, labels: np.ndarray, k: int, l: int) -> np.ndarray:
    """Counts per (sensitive class, label class) cell."""
    counts = np.zeros((k, l), dtype=int)
    np.add.at(counts, (np.asarray(sensitive, dtype=int), np.asarray(labels, dtype=int)), 1)
    return counts


def evaluate(params, dataset) -> EvalReport:
    """Hard-prediction metrics of a model on a held-out dataset."""
    from .model import hard_predictions

    preds = hard_predictions(params, dataset.features)
    return EvalReport(
        error=misclassification_error(preds, dataset.labels),
        dp_violation=dem_parity_violation(preds, dataset.sensitive),
        eo_violation=eq_odds_violation(preds, dataset.sensitive, dataset.labels),
        support=support_counts(dataset.sensitive, dataset.labels, dataset.k, dataset.l),
    )
