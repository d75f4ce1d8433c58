"""Gaussian noise calibration for the per-silo gradient releases.

The variance needed for a fixed (epsilon, delta) budget grows linearly in
the round count and shrinks quadratically in the silo size; averaging the
noisy messages of N silos cuts the effective variance by another factor N.
"""

import numpy as np

from fairfl.privacy import PrivacyBudget, clip, perturb, sensitivity, steffle_noise, stream

delta, rho = 1e-5, 0.35
print("sigma_w^2 for the dual-gradient release (T=640, clip L=1, radius D=2):")
print(f"{'epsilon':>8} {'n_tilde=500':>12} {'n_tilde=1250':>13} {'n_tilde=5000':>13}")
for eps in (1.0, 3.0, 9.0):
    row = [steffle_noise(PrivacyBudget(eps, delta, rho), 640, nt, 1.0, 2.0).sigma_w_sq
           for nt in (500, 1250, 5000)]
    print(f"{eps:8.1f} {row[0]:12.4f} {row[1]:13.4f} {row[2]:13.4f}")

bound = sensitivity(D=2.0, L_theta=1.0, batch=256, rho=rho)
print(f"\nsquared sensitivity of a 256-sample batch release: "
      f"theta {bound.delta_theta:.3e}, dual {bound.delta_w:.3e}")

g = np.array([3.0, 4.0])
print(f"\nclipping [3, 4] (norm 5) at threshold 2 -> {clip(g, 2.0)} (norm 2, direction kept)")

sigma_sq, N = 0.8, 4
draws = np.stack([perturb(np.zeros(200_000), sigma_sq, stream(0, 'silo', j)) for j in range(N)])
print(f"\nper-silo noise variance {draws.var(axis=1).round(4)} (target {sigma_sq})")
print(f"variance of the N-silo average: {draws.mean(axis=0).var():.4f} "
      f"(target {sigma_sq / N})")
