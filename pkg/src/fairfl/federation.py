"""Simulated federated training engines.

Silos are in-process actors. Every round the server broadcasts the current
iterates, each silo's non-sensitive division computes plain loss gradients on
a fresh minibatch, the sensitive division computes the fairness-regularizer
gradients over the indices it owns and perturbs them with calibrated Gaussian
noise, and the server aggregates by batch-weighted mean and takes a descent
step in the model parameters plus a projected ascent step in the dual matrix.

Determinism contract: all randomness flows through per-(purpose, silo, round)
streams derived from the master seed, and aggregation is by silo index, so
results do not depend on the order silo work is executed in.

Per-round diagnostics are plain dicts collected into a trace list;
``write_trace`` serializes a trace as line-delimited JSON records.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import fairness, model, privacy
from .dataio import (
    SensitiveDistribution,
    SiloPartition,
    TabularDataset,
    sensitive_distribution,
    sensitive_distribution_by_label,
)
from .fairness import FairnessSpec, project_frobenius
from .model import ModelParams
from .privacy import NoiseScales, PrivacyBudget

MODES = ("federated", "single_silo", "central_sensitive", "general")


@dataclass
class RoundConfig:
    """Step sizes, schedule, and batch settings for one training run."""

    eta_theta: float = 0.25
    eta_w: float = 1e-5
    batch_size: int = 256
    epochs: int = 40
    rounds: int | None = None  # explicit T; overrides epochs when set
    lr_decay: float = 0.8
    lr_decay_every: int = 10  # in epochs; 0 disables decay
    clip_threshold: float | None = 2.0  # loss-gradient l2 clip; None disables
    dual_radius: float = 2.0  # Frobenius radius of the dual feasible set
    sampling: str | None = None  # "epoch" | "with_replacement"; None = engine default
    return_final: bool = False  # final iterate instead of a uniformly random round
    defensive_clip: bool = True  # cap regularizer gradients at their analytic bounds
    probe_every: int | None = None  # evaluate the training objective every k rounds

    def __post_init__(self):
        if self.eta_theta <= 0 or self.eta_w <= 0:
            raise ValueError("step sizes must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")
        if self.sampling not in (None, "epoch", "with_replacement"):
            raise ValueError(f"unknown sampling mode {self.sampling!r}")
        if self.rounds is not None and self.rounds < 0:
            raise ValueError("round count must be nonnegative")


@dataclass
class Topology:
    """How rows are routed between non-sensitive and sensitive divisions.

    ``federated``: each silo holds both divisions of its own rows.
    ``single_silo``: one silo holds everything.
    ``central_sensitive``: per-silo non-sensitive data, one sensitive silo
    answering for every row. ``general``: explicit index sets per division;
    each family must partition the row range.
    """

    mode: str = "federated"
    nonsensitive_groups: list[np.ndarray] | None = None
    sensitive_groups: list[np.ndarray] | None = None
    dummy_noise: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown topology mode {self.mode!r}")


@dataclass
class ResolvedTopology:
    mode: str
    nonsensitive: list[np.ndarray]
    sensitive: list[np.ndarray]
    dummy_noise: bool


def _check_cover(groups: list[np.ndarray], n: int, family: str) -> None:
    merged = np.concatenate(groups) if groups else np.array([], dtype=int)
    if len(np.unique(merged)) != merged.size:
        raise ValueError(f"{family} index sets overlap")
    if merged.size != n or (np.sort(merged) != np.arange(n)).any():
        raise ValueError(f"{family} index sets must cover all {n} rows")


def resolve_topology(
    topology: Topology, partition: SiloPartition | None, n: int
) -> ResolvedTopology:
    """Expand a topology into explicit per-division index sets over [0, n)."""
    everything = [np.arange(n)]
    if topology.mode == "federated":
        if partition is None:
            raise ValueError("federated mode needs a silo partition")
        groups = [np.asarray(a) for a in partition.assignments]
        non, sens = groups, groups
    elif topology.mode == "single_silo":
        non, sens = everything, everything
    elif topology.mode == "central_sensitive":
        if partition is None:
            raise ValueError("central_sensitive mode needs a silo partition")
        non, sens = [np.asarray(a) for a in partition.assignments], everything
    else:  # general
        if topology.nonsensitive_groups is None or topology.sensitive_groups is None:
            raise ValueError("general mode needs explicit index sets for both divisions")
        non = [np.asarray(g, dtype=int) for g in topology.nonsensitive_groups]
        sens = [np.asarray(g, dtype=int) for g in topology.sensitive_groups]
    _check_cover(non, n, "non-sensitive")
    _check_cover(sens, n, "sensitive")
    return ResolvedTopology(topology.mode, non, sens, topology.dummy_noise)


def project_ball(dual: fairness.DualMatrix) -> fairness.DualMatrix:
    """Project a dual iterate back onto its Frobenius ball."""
    return dual.project()


def write_trace(trace: list[dict], path) -> None:
    """Serialize per-round diagnostics as one JSON record per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in trace:
            fh.write(json.dumps(record) + "\n")


def read_trace(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


@dataclass
class FairnessState:
    """Per-run fairness context: notion, weight, and sensitive distributions."""

    spec: FairnessSpec
    dist: SensitiveDistribution
    dists_by_label: list[SensitiveDistribution] | None = None
    label_marginal: np.ndarray | None = None

    @property
    def rho(self) -> float:
        if self.dists_by_label is not None:
            return min(d.rho for d in self.dists_by_label)
        return self.dist.rho


def prepare_fairness_state(spec: FairnessSpec, dataset: TabularDataset) -> FairnessState:
    dist = sensitive_distribution(dataset)
    if spec.notion == fairness.EQUALIZED_ODDS:
        dists, p_y = sensitive_distribution_by_label(dataset)
        return FairnessState(spec, dist, dists, p_y)
    return FairnessState(spec, dist)


def _dual_shape(state: FairnessState, dataset: TabularDataset, n_classes: int) -> tuple:
    if state.spec.notion == fairness.EQUALIZED_ODDS:
        return (dataset.l, dataset.k, n_classes)
    return (dataset.k, n_classes)


def _project_dual(dual: np.ndarray, radius: float) -> np.ndarray:
    if dual.ndim == 2:
        return project_frobenius(dual, radius)
    return np.stack([project_frobenius(slab, radius) for slab in dual])


def _silo_schedule(count: int):
    """Iteration order of per-silo work; results are keyed by index, so any order works."""
    return range(count)


def _draw_batch(
    rows: np.ndarray, m: int, sampling: str, seed: int, silo: int, t: int
) -> np.ndarray:
    size = min(m, rows.size)
    if sampling == "with_replacement":
        rng = privacy.stream(seed, "batch", silo, t)
        return rows[rng.integers(0, rows.size, size=size)]
    if size == rows.size:
        # Full batch: keep natural order so full-batch runs reduce exactly
        # to deterministic gradient descent.
        return rows
    per_epoch = max(1, rows.size // size)
    epoch, slot = divmod(t, per_epoch)
    perm = privacy.stream(seed, "shuffle", silo, epoch).permutation(rows.size)
    return rows[perm[slot * size : (slot + 1) * size]]


@dataclass
class RoundContribution:
    """Aggregated gradients for one round plus routing diagnostics."""

    loss_grad: np.ndarray
    psi_grad_theta: np.ndarray | None
    psi_grad_dual: np.ndarray | None
    sampled: np.ndarray
    participating: list[int]
    batch_sizes: dict[int, int]


def _psi_caps(radius: float, rho: float, lipschitz: float) -> tuple[float, float]:
    # Analytic norm bounds on a batch-mean regularizer gradient: the dual
    # gradient is at most 2D + 2/sqrt(rho); the model-parameter gradient is
    # at most L * (D^2 + 2D/sqrt(rho)).
    w_cap = 2.0 * radius + 2.0 / math.sqrt(rho)
    theta_cap = lipschitz * (radius**2 + 2.0 * radius / math.sqrt(rho))
    return theta_cap, w_cap


def route_round(
    params: ModelParams,
    dual: np.ndarray,
    dataset: TabularDataset,
    topo: ResolvedTopology,
    state: FairnessState,
    noise: list[NoiseScales],
    cfg: RoundConfig,
    seed: int,
    t: int,
    sampling: str = "epoch",
) -> RoundContribution:
    """One communication round under any topology.

    Non-sensitive silos sample their minibatches and emit clipped loss
    gradients. Every sensitive silo owning sampled rows computes the
    regularizer gradients over exactly those rows and perturbs them with its
    own calibrated noise; with dummy noise on, non-participating sensitive
    silos emit zero-mean noise of the same variance. The server weighs every
    message by its batch share, which keeps the aggregate an unbiased
    estimate of the full-batch gradient.
    """
    X, y_all, s_all = dataset.features, dataset.labels, dataset.sensitive
    n_non = len(topo.nonsensitive)

    batches: list[np.ndarray | None] = [None] * n_non
    loss_grads: list[np.ndarray | None] = [None] * n_non
    for j in _silo_schedule(n_non):
        batch = _draw_batch(topo.nonsensitive[j], cfg.batch_size, sampling, seed, j, t)
        _, grad = model.mean_loss_and_grad(params, X[batch], y_all[batch])
        if cfg.clip_threshold is not None:
            grad = privacy.clip(grad, cfg.clip_threshold)
        batches[j] = batch
        loss_grads[j] = grad

    sampled = np.concatenate(batches)
    total = sampled.size
    loss_grad = sum((b.size / total) * g for b, g in zip(batches, loss_grads))

    if state.spec.lam == 0.0:
        return RoundContribution(loss_grad, None, None, sampled, [], {})

    # Route each sampled row (keeping multiplicity under with-replacement
    # sampling) to the sensitive silo owning it.
    owner = np.full(dataset.n, -1, dtype=int)
    for c, owned in enumerate(topo.sensitive):
        owner[owned] = c
    sampled_owner = owner[sampled]
    if (sampled_owner < 0).any():
        raise RuntimeError("sampled rows not fully owned by the sensitive silos")
    lipschitz = cfg.clip_threshold if cfg.clip_threshold is not None else 1.0
    theta_cap, w_cap = _psi_caps(cfg.dual_radius, state.rho, lipschitz)

    n_sens = len(topo.sensitive)
    messages: list[tuple[np.ndarray, np.ndarray, int] | None] = [None] * n_sens
    participating: list[int] = []
    batch_sizes: dict[int, int] = {}
    for c in _silo_schedule(n_sens):
        mine = sampled[sampled_owner == c]
        if mine.size:
            if state.spec.notion == fairness.EQUALIZED_ODDS:
                g_theta, g_dual = fairness.psi_eo_batch_grads(
                    params, dual, X[mine], s_all[mine], y_all[mine], state.dists_by_label
                )
            else:
                g_theta, g_dual = fairness.psi_batch_grads(
                    params, dual, X[mine], s_all[mine], state.dist
                )
            if cfg.defensive_clip:
                g_theta = privacy.clip(g_theta, theta_cap)
                if float(np.linalg.norm(g_dual)) > w_cap:
                    g_dual = g_dual * (w_cap / float(np.linalg.norm(g_dual)))
            h_theta = privacy.perturb(g_theta, noise[c].sigma_theta_sq, privacy.stream(seed, "noise_theta", c, t))
            h_dual = privacy.perturb(g_dual, noise[c].sigma_w_sq, privacy.stream(seed, "noise_w", c, t))
            messages[c] = (h_theta, h_dual, mine.size)
            batch_sizes[c] = int(mine.size)
        elif topo.dummy_noise:
            zero_t = np.zeros(params.dim)
            zero_w = np.zeros(dual.shape)
            h_theta = privacy.perturb(zero_t, noise[c].sigma_theta_sq, privacy.stream(seed, "noise_theta", c, t))
            h_dual = privacy.perturb(zero_w, noise[c].sigma_w_sq, privacy.stream(seed, "noise_w", c, t))
            messages[c] = (h_theta, h_dual, 0)

    sizes = [msg[2] for msg in messages if msg is not None and msg[2] > 0]
    dummy_weight = float(np.mean(sizes)) / total

    psi_theta = np.zeros(params.dim)
    psi_dual = np.zeros(dual.shape)
    for c, msg in enumerate(messages):
        if msg is None:
            continue
        h_theta, h_dual, size = msg
        weight = size / total if size else dummy_weight
        psi_theta += weight * h_theta
        psi_dual += weight * h_dual
        if size:
            participating.append(c)

    return RoundContribution(loss_grad, psi_theta, psi_dual, sampled, participating, batch_sizes)


@dataclass
class SteffleResult:
    theta: ModelParams
    dual: np.ndarray
    trace: list[dict]
    t_hat: int
    rounds: int
    noise: NoiseScales
    n_tilde: int
    warnings: list[str] = field(default_factory=list)


def _resolve_rounds(cfg: RoundConfig, min_rows: int) -> tuple[int, int]:
    m = min(cfg.batch_size, min_rows)
    per_epoch = max(1, min_rows // m)
    T = cfg.rounds if cfg.rounds is not None else cfg.epochs * per_epoch
    return T, per_epoch


def _eta_at(cfg: RoundConfig, t: int, per_epoch: int) -> float:
    if cfg.lr_decay_every <= 0 or cfg.lr_decay == 1.0:
        return cfg.eta_theta
    epoch = t // per_epoch
    return cfg.eta_theta * cfg.lr_decay ** (epoch // cfg.lr_decay_every)


def run_steffle(
    dataset: TabularDataset,
    partition: SiloPartition | None,
    spec: FairnessSpec,
    budget: PrivacyBudget,
    cfg: RoundConfig,
    topology: Topology | None = None,
    seed: int = 0,
    theta0: ModelParams | None = None,
) -> SteffleResult:
    """Fair private federated training of the logistic model.

    Runs the noisy distributed descent-ascent loop: the model parameters move
    against the aggregated loss-plus-regularizer gradient while the dual
    matrix takes projected ascent steps scaled by the fairness weight. The
    returned model is the iterate of a uniformly random round unless
    ``cfg.return_final`` is set.
    """
    topo = resolve_topology(topology or Topology(), partition, dataset.n)
    state = prepare_fairness_state(spec, dataset)
    if budget.finite and budget.rho > state.rho + 1e-12:
        raise ValueError(
            f"budget assumes minimum attribute frequency {budget.rho}, but the data "
            f"only guarantees {state.rho:.6f}; noise would be under-calibrated"
        )

    params = theta0 if theta0 is not None else ModelParams.zeros(dataset.d, dataset.l)
    dual = np.zeros(_dual_shape(state, dataset, params.n_classes))
    sampling = cfg.sampling or "epoch"

    min_rows = min(g.size for g in topo.nonsensitive)
    T, per_epoch = _resolve_rounds(cfg, min_rows)
    lipschitz = cfg.clip_threshold if cfg.clip_threshold is not None else 1.0

    warnings: list[str] = []
    noise: list[NoiseScales] = []
    if topo.mode in ("federated", "single_silo"):
        n_tilde = dataset.n // len(topo.sensitive)
        batch = min(cfg.batch_size, min_rows)
        common = privacy.steffle_noise(
            budget, T, n_tilde, lipschitz, cfg.dual_radius, batch_size=batch if T else None
        )
        noise = [common] * len(topo.sensitive)
        nominal = common
    else:
        # Hybrid modes: each sensitive silo calibrates to its own holdings.
        # central_sensitive answers for every sampled row, so its effective
        # batch is the total sample; in general mode the per-round batch is
        # data dependent and the round-count floor is reported, not enforced.
        total_batch = sum(min(cfg.batch_size, g.size) for g in topo.nonsensitive)
        n_tilde = min(g.size for g in topo.sensitive)
        for g in topo.sensitive:
            check = total_batch if topo.mode == "central_sensitive" else None
            try:
                scale = privacy.steffle_noise(
                    budget, T, g.size, lipschitz, cfg.dual_radius, batch_size=check
                )
            except ValueError as exc:
                raise ValueError(f"noise precondition failed for a sensitive silo: {exc}") from exc
            noise.append(scale)
        if topo.mode == "general" and budget.finite and T:
            floor = (n_tilde * math.sqrt(budget.epsilon) / 2.0) ** 2
            if T < floor:
                warnings.append(
                    f"T={T} is below the batch-1 worst-case floor {floor:.0f} for the "
                    "smallest sensitive silo; acceptable only if per-round batches stay large"
                )
        nominal = noise[0]

    rng_pick = privacy.stream(seed, "iterate")
    t_hat = int(rng_pick.integers(1, T + 1)) if T >= 1 else 0
    theta_hat = params
    trace: list[dict] = []

    for t in range(T):
        eta_t = _eta_at(cfg, t, per_epoch)
        contrib = route_round(params, dual, dataset, topo, state, noise, cfg, seed, t, sampling)

        direction = contrib.loss_grad
        if state.spec.lam > 0.0:
            direction = direction + state.spec.lam * contrib.psi_grad_theta
            dual = _project_dual(
                dual + state.spec.lam * cfg.eta_w * contrib.psi_grad_dual, cfg.dual_radius
            )
        params = ModelParams.from_vector(
            params.to_vector() - eta_t * direction, dataset.d, dataset.l
        )

        record = {
            "round": t,
            "eta_theta": eta_t,
            "loss_grad_norm": float(np.linalg.norm(contrib.loss_grad)),
            "sigma_theta_sq": nominal.sigma_theta_sq,
            "sigma_w_sq": nominal.sigma_w_sq,
        }
        if state.spec.lam > 0.0:
            record["psi_grad_theta_norm"] = float(np.linalg.norm(contrib.psi_grad_theta))
            record["psi_grad_dual_norm"] = float(np.linalg.norm(contrib.psi_grad_dual))
            record["dual_norm"] = float(np.linalg.norm(dual))
            record["participating"] = contrib.participating
        if cfg.probe_every and t % cfg.probe_every == 0:
            record["objective"] = fairness.fermi_objective(params, state.spec, dataset, state.dist)
        trace.append(record)

        if t + 1 == t_hat:
            theta_hat = params

    chosen = params if (cfg.return_final or T == 0) else theta_hat
    return SteffleResult(
        theta=chosen,
        dual=dual,
        trace=trace,
        t_hat=T if cfg.return_final else t_hat,
        rounds=T,
        noise=nominal,
        n_tilde=n_tilde,
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# Generic noisy federated descent-ascent for smooth strongly-concave problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Smoothness:
    """Lipschitz/smoothness record of a min-max objective.

    ``mu`` is the strong-concavity modulus in the dual variable;
    ``beta_thetaw`` the cross-smoothness; ``delta_phi`` an upper bound on the
    initial optimality gap of the primal envelope.
    """

    L_theta: float
    L_w: float
    beta_theta: float
    beta_w: float
    beta_thetaw: float
    mu: float
    delta_phi: float


@dataclass
class MinMaxProblem:
    """Per-sample oracles for min_theta max_w mean_z f(theta, w; z).

    The gradient callables take (theta, w, Z_batch) and return one row per
    sample; the engine averages them.
    """

    d_theta: int
    d_w: int
    dual_radius: float
    value: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    grad_theta: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    grad_w: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    smoothness: Smoothness


@dataclass
class SgdaResult:
    theta: np.ndarray
    w: np.ndarray
    trace: list[dict]
    t_hat: int
    rounds: int
    noise: NoiseScales


def run_fed_sgda(
    problem: MinMaxProblem,
    silos: list[np.ndarray],
    budget: PrivacyBudget,
    cfg: RoundConfig,
    seed: int = 0,
    theta0: np.ndarray | None = None,
    w0: np.ndarray | None = None,
) -> SgdaResult:
    """Noisy federated stochastic gradient descent-ascent on a generic problem.

    Silos hold equal-footing shards; every round each silo draws a minibatch
    (with replacement by default), sends noisy primal and dual gradients, and
    the server averages them for a descent step and a projected ascent step.
    """
    silos = [np.asarray(Z) for Z in silos]
    N = len(silos)
    n_tilde = min(Z.shape[0] for Z in silos)
    m = min(cfg.batch_size, n_tilde)
    T, per_epoch = _resolve_rounds(cfg, n_tilde)
    sampling = cfg.sampling or "with_replacement"

    scales = sgda_noise_for(problem, budget, T, n_tilde, m)
    theta = np.zeros(problem.d_theta) if theta0 is None else np.asarray(theta0, dtype=float)
    w = np.zeros(problem.d_w) if w0 is None else np.asarray(w0, dtype=float)

    t_hat = int(privacy.stream(seed, "iterate").integers(1, T + 1)) if T >= 1 else 0
    theta_hat = theta.copy()
    trace: list[dict] = []

    for t in range(T):
        eta_t = _eta_at(cfg, t, per_epoch)
        h_theta: list[np.ndarray | None] = [None] * N
        h_w: list[np.ndarray | None] = [None] * N
        for j in _silo_schedule(N):
            rows = np.arange(silos[j].shape[0])
            batch = _draw_batch(rows, m, sampling, seed, j, t)
            Z = silos[j][batch]
            g_theta = problem.grad_theta(theta, w, Z).mean(axis=0)
            g_w = problem.grad_w(theta, w, Z).mean(axis=0)
            h_theta[j] = privacy.perturb(
                g_theta, scales.sigma_theta_sq, privacy.stream(seed, "noise_theta", j, t)
            )
            h_w[j] = privacy.perturb(
                g_w, scales.sigma_w_sq, privacy.stream(seed, "noise_w", j, t)
            )
        agg_theta = sum(h_theta) / N
        agg_w = sum(h_w) / N
        theta = theta - eta_t * agg_theta
        w = project_frobenius(w + cfg.eta_w * agg_w, problem.dual_radius)
        trace.append(
            {
                "round": t,
                "eta_theta": eta_t,
                "grad_theta_norm": float(np.linalg.norm(agg_theta)),
                "grad_w_norm": float(np.linalg.norm(agg_w)),
            }
        )
        if t + 1 == t_hat:
            theta_hat = theta.copy()

    chosen = theta if (cfg.return_final or T == 0) else theta_hat
    return SgdaResult(
        theta=chosen,
        w=w,
        trace=trace,
        t_hat=T if cfg.return_final else t_hat,
        rounds=T,
        noise=scales,
    )


def sgda_noise_for(
    problem: MinMaxProblem, budget: PrivacyBudget, T: int, n_tilde: int, batch: int
) -> NoiseScales:
    sm = problem.smoothness
    return privacy.sgda_noise(
        budget, T, n_tilde, sm.L_theta, sm.L_w, batch_size=batch if T else None
    )


def sgda_hyperparams(
    problem: MinMaxProblem, budget: PrivacyBudget, n_tilde: int, N: int
) -> tuple[RoundConfig, dict]:
    """Step sizes and round count from the convergence analysis.

    eta_theta = 1 / (16 kappa_w (beta_theta + beta_thetaw kappa_thetaw)),
    eta_w = 1 / beta_w, and T scales with eps * n_tilde * sqrt(N) times the
    smaller of a primal-dimension and a dual-dimension branch. Both branch
    values are echoed in the diagnostics.
    """
    sm = problem.smoothness
    if sm.mu <= 0:
        raise ValueError("strong-concavity modulus must be positive")
    if not budget.finite:
        raise ValueError("round-count calibration needs a finite privacy budget")
    kappa_w = sm.beta_w / sm.mu
    kappa_tw = sm.beta_thetaw / sm.mu
    eta_theta = 1.0 / (16.0 * kappa_w * (sm.beta_theta + sm.beta_thetaw * kappa_tw))
    eta_w = 1.0 / sm.beta_w
    front = math.sqrt(
        kappa_w
        * (sm.delta_phi * (sm.beta_theta + sm.beta_thetaw * kappa_tw) + sm.beta_thetaw**2 * problem.dual_radius**2)
    )
    branch_theta = 1.0 / (sm.L_theta * math.sqrt(problem.d_theta)) if sm.L_theta > 0 else math.inf
    branch_w = (
        sm.beta_w / (sm.beta_thetaw * sm.L_w * math.sqrt(kappa_w * problem.d_w))
        if sm.beta_thetaw > 0 and sm.L_w > 0
        else math.inf
    )
    t_raw = front * budget.epsilon * n_tilde * math.sqrt(N) * min(branch_theta, branch_w)
    T = max(1, int(round(t_raw)))
    diagnostics = {
        "eta_theta": eta_theta,
        "eta_w": eta_w,
        "kappa_w": kappa_w,
        "kappa_thetaw": kappa_tw,
        "branch_theta": branch_theta,
        "branch_w": branch_w,
        "T_raw": t_raw,
        "T": T,
    }
    return (
        RoundConfig(
            eta_theta=eta_theta,
            eta_w=eta_w,
            rounds=T,
            lr_decay=1.0,
            lr_decay_every=0,
            clip_threshold=None,
            dual_radius=problem.dual_radius,
        ),
        diagnostics,
    )
