"""The chi-squared fairness regularizer and its min-max reformulation.

The per-sample auxiliary function psi is concave in the dual matrix W; the
dataset average of psi, maximized over W, equals the chi-squared divergence
between the prediction/attribute joint and the product of its marginals.
That equivalence is what lets silos exchange unbiased stochastic gradients
instead of a dataset-global statistic.
"""

import numpy as np

from fairfl.dataio import TabularDataset, sensitive_distribution
from fairfl.fairness import (
    chi2_dem_parity,
    chi2_eq_odds,
    conditional_joint,
    fermi_objective,
    inner_maximizer,
    joint_from_soft_predictions,
    psi_batch,
    FairnessSpec,
)
from fairfl.model import ModelParams, predict_probs_batch

rng = np.random.default_rng(0)

# a synthetic dataset whose labels correlate with the sensitive attribute
n, d = 400, 6
s = rng.integers(0, 2, n)
X = rng.normal(size=(n, d)) + 0.8 * s[:, None]
y = (X[:, 0] + X[:, 1] + 0.5 * rng.normal(size=n) > 0.8).astype(int)
ds = TabularDataset(X, y, s, k=2, l=2)
dist = sensitive_distribution(ds)

params = ModelParams(rng.normal(scale=0.5, size=(2, d)), np.zeros(2))
probs = predict_probs_batch(params, X)

joint = joint_from_soft_predictions(probs, s, 2)
divergence = chi2_dem_parity(joint)
print(f"demographic-parity divergence of a random model: {divergence:.6f}")

dual = inner_maximizer(params, ds, dist, D=50.0)
inner_value = psi_batch(params, dual.W, X, s, dist).mean()
print(f"max over W of the averaged psi:                  {inner_value:.6f}")
print(f"difference: {abs(divergence - inner_value):.2e}  (the two sides agree)\n")

eo = chi2_eq_odds(conditional_joint(probs, s, y, 2, 2))
print(f"equalized-odds (label-conditioned) divergence:   {eo:.6f}")

for lam in (0.0, 0.5, 2.0):
    value = fermi_objective(params, FairnessSpec(lam=lam), ds)
    print(f"penalized objective at lam={lam:3.1f}: {value:.6f}")
