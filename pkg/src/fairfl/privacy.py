"""Gaussian-mechanism calibration, clipping, and per-silo noise streams.

Noise variances come from the closed-form record-level DP calibrations for
the two training loops; ``epsilon = inf`` switches every mechanism off so
non-private baselines share the same code path.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PrivacyBudget:
    """(epsilon, delta) budget plus the minimum sensitive-class frequency rho."""

    epsilon: float
    delta: float
    rho: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if self.finite and self.epsilon > 2.0 * math.log(1.0 / self.delta):
            raise ValueError(
                f"epsilon={self.epsilon} exceeds 2*ln(1/delta)="
                f"{2.0 * math.log(1.0 / self.delta):.4f}; calibration formulas do not apply"
            )

    @property
    def finite(self) -> bool:
        return math.isfinite(self.epsilon)


@dataclass(frozen=True)
class NoiseScales:
    """Per-round Gaussian variances for the primal and dual gradient releases."""

    sigma_theta_sq: float
    sigma_w_sq: float


@dataclass(frozen=True)
class SensitivityBound:
    """Worst-case batch-gradient change under one sensitive-attribute flip."""

    delta_theta: float
    delta_w: float


def _check_rounds(budget: PrivacyBudget, T: int, n_tilde: int, batch_size: int | None) -> None:
    if T < 0:
        raise ValueError("round count must be nonnegative")
    if batch_size is not None and budget.finite:
        t_min = (n_tilde * math.sqrt(budget.epsilon) / (2.0 * batch_size)) ** 2
        if T < t_min:
            raise ValueError(
                f"T={T} below the minimum {t_min:.2f} required for "
                f"n_tilde={n_tilde}, batch={batch_size}, epsilon={budget.epsilon}"
            )


def steffle_noise(
    budget: PrivacyBudget,
    T: int,
    n_tilde: int,
    L_theta: float,
    D: float,
    batch_size: int | None = None,
) -> NoiseScales:
    """Minimum admissible Gaussian variances for the fair-FL gradient releases.

    sigma_w^2  = 16 T ln(1/delta) / (eps^2 n_tilde^2 rho)
    sigma_th^2 = sigma_w^2 * L_theta^2 D^2
    """
    _check_rounds(budget, T, n_tilde, batch_size)
    if not budget.finite:
        return NoiseScales(0.0, 0.0)
    base = 16.0 * T * math.log(1.0 / budget.delta) / (budget.epsilon**2 * n_tilde**2 * budget.rho)
    return NoiseScales(sigma_theta_sq=base * L_theta**2 * D**2, sigma_w_sq=base)


def sgda_noise(
    budget: PrivacyBudget,
    T: int,
    n_tilde: int,
    L_theta: float,
    L_w: float,
    batch_size: int | None = None,
) -> NoiseScales:
    """Variances for the generic min-max loop: 8 T L^2 ln(1/delta) / (eps^2 n_tilde^2)."""
    _check_rounds(budget, T, n_tilde, batch_size)
    if not budget.finite:
        return NoiseScales(0.0, 0.0)
    base = 8.0 * T * math.log(1.0 / budget.delta) / (budget.epsilon**2 * n_tilde**2)
    return NoiseScales(sigma_theta_sq=base * L_theta**2, sigma_w_sq=base * L_w**2)


def sensitivity(D: float, L_theta: float, batch: int, rho: float) -> SensitivityBound:
    """Printed sensitivity bounds 8 D^2 L^2 / (|B|^2 rho) and 8 / (|B|^2 rho).

    These are consistent with the noise formulas as bounds on the *squared*
    norm of the batch-mean gradient difference; see the adjacency checks in
    the test suite, which report the plain-norm supremum alongside.
    """
    if batch < 1:
        raise ValueError("batch size must be at least 1")
    if not rho > 0:
        raise ValueError("rho must be positive")
    scale = 8.0 / (batch**2 * rho)
    return SensitivityBound(delta_theta=scale * D**2 * L_theta**2, delta_w=scale)


def clip(grad: np.ndarray, threshold: float) -> np.ndarray:
    """Rescale to l2 norm <= threshold; direction and small inputs unchanged."""
    if not threshold > 0:
        raise ValueError("clip threshold must be positive")
    grad = np.asarray(grad, dtype=float)
    norm = float(np.linalg.norm(grad))
    if norm <= threshold:
        return grad
    return grad * (threshold / norm)


def perturb(value: np.ndarray, sigma_sq: float, rng: np.random.Generator) -> np.ndarray:
    """Add iid zero-mean Gaussian noise of the given variance (0 is the identity)."""
    if sigma_sq < 0:
        raise ValueError("variance must be nonnegative")
    value = np.asarray(value, dtype=float)
    if sigma_sq == 0.0:
        return value
    return value + rng.normal(0.0, math.sqrt(sigma_sq), size=value.shape)


def stream(master_seed: int, *path: int | str) -> np.random.Generator:
    """Independent RNG stream keyed by (master seed, silo, round, purpose, ...).

    Streams are never shared: each (silo, round, purpose) key maps to its own
    generator, so per-silo work can run in any order without changing results.
    """
    words = [int(master_seed) & 0xFFFFFFFF]
    for p in path:
        if isinstance(p, str):
            words.append(zlib.crc32(p.encode("utf-8")))
        else:
            words.append(int(p) & 0xFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(words))
