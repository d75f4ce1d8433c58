"""Experiment sweeps: configs, grid execution, and tradeoff tables.

A config is a flat ``key = value`` text file with comma-separated lists for
the sweep axes, e.g.::

    dataset = data/census5k.csv
    schema = data/census5k.schema
    lambdas = 0, 0.5, 1, 2
    epsilons = 1, 3, 9
    hetero = 0, 0.75
    silos = 3
    trials = 15

Every (lambda, epsilon, h, N) grid point runs once per trial seed; failures
are recorded per cell instead of aborting the sweep, and each grid point
gains one seed-averaged summary row.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from itertools import product

import numpy as np

from . import metrics
from .dataio import TabularDataset, load_csv, partition_heterogeneous, train_test_split
from .federation import RoundConfig, Topology, prepare_fairness_state, run_steffle
from .fairness import FairnessSpec
from .privacy import PrivacyBudget

EXPERIMENT_MODES = (
    "steffle",
    "non_private_steffle",
    "central_dp",
    "non_private_central",
    "no_fairness_fl",
    "no_fairness_central",
)

CSV_HEADER = "lambda,epsilon,h,N,seed,error,dp_violation,eo_violation,sigma_theta_sq,sigma_w_sq,seconds"


@dataclass
class ExperimentConfig:
    """One sweep: dataset, grid axes, trial count, and engine overrides."""

    dataset: str
    schema: str
    output: str = "tradeoff.csv"
    mode: str = "steffle"
    notion: str = "demographic_parity"
    lambdas: list[float] = field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0])
    epsilons: list[float] = field(default_factory=lambda: [1.0, 3.0, 9.0])
    hetero: list[float] = field(default_factory=lambda: [0.0, 0.75])
    silos: list[int] = field(default_factory=lambda: [3])
    delta: float = 1e-5
    trials: int = 15
    seed_base: int = 0
    split_ratio: float = 0.75
    split_seed: int = 0
    topology: str = "federated"
    dummy_noise: bool = False
    # engine overrides; sweeps report the trained model, not a random round
    eta_theta: float = 0.25
    eta_w: float = 1e-5
    batch_size: int = 256
    epochs: int = 40
    rounds: int | None = None
    lr_decay: float = 0.8
    lr_decay_every: int = 10
    clip_threshold: float | None = 2.0
    dual_radius: float = 2.0
    sampling: str | None = None
    return_final: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in EXPERIMENT_MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {EXPERIMENT_MODES}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    def effective_grid(self) -> list[tuple[float, float, float, int]]:
        """The (lambda, epsilon, h, N) grid after applying mode semantics."""
        lams = list(self.lambdas)
        epss = list(self.epsilons)
        silos = list(self.silos)
        if self.mode in ("no_fairness_fl", "no_fairness_central"):
            lams = [0.0]
        if self.mode in ("non_private_steffle", "non_private_central"):
            epss = [math.inf]
        if self.mode in ("central_dp", "non_private_central", "no_fairness_central"):
            silos = [1]
        return [
            (lam, eps, h, n)
            for lam, eps, h, n in product(lams, epss, self.hetero, silos)
        ]

    def round_config(self) -> RoundConfig:
        return RoundConfig(
            eta_theta=self.eta_theta,
            eta_w=self.eta_w,
            batch_size=self.batch_size,
            epochs=self.epochs,
            rounds=self.rounds,
            lr_decay=self.lr_decay,
            lr_decay_every=self.lr_decay_every,
            clip_threshold=self.clip_threshold,
            dual_radius=self.dual_radius,
            sampling=self.sampling,
            return_final=self.return_final,
        )


@dataclass
class TradeoffRecord:
    """One experiment outcome (or the seed-averaged summary of a grid point)."""

    lam: float
    epsilon: float
    h: float
    N: int
    seed: int | str
    error: float = math.nan
    dp_violation: float = math.nan
    eo_violation: float = math.nan
    sigma_theta_sq: float = math.nan
    sigma_w_sq: float = math.nan
    seconds: float = math.nan
    delta: float = math.nan
    rounds: int = 0
    n_tilde: int = 0
    rho: float = math.nan
    status: str = "ok"
    summary: bool = False


_LIST_KEYS = {"lambdas", "epsilons", "hetero", "silos"}
_INT_KEYS = {"trials", "seed_base", "split_seed", "batch_size", "epochs", "lr_decay_every", "jobs"}
_OPTIONAL_INT_KEYS = {"rounds"}
_FLOAT_KEYS = {"delta", "split_ratio", "eta_theta", "eta_w", "lr_decay", "dual_radius"}
_OPTIONAL_FLOAT_KEYS = {"clip_threshold"}
_BOOL_KEYS = {"return_final", "dummy_noise"}
_OPTIONAL_STR_KEYS = {"sampling"}


def _parse_scalar(text: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "infinity"):
        return math.inf
    return float(text)


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse the key = value config format; keyword overrides win."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        known = {f.name for f in fields(ExperimentConfig)}
        if key not in known:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in _LIST_KEYS:
            items = [v for v in (s.strip() for s in value.split(",")) if v]
            parsed = [_parse_scalar(v) for v in items]
            values[key] = [int(v) for v in parsed] if key == "silos" else parsed
        elif key in _INT_KEYS:
            values[key] = int(value)
        elif key in _OPTIONAL_INT_KEYS:
            values[key] = None if value.lower() == "none" else int(value)
        elif key in _FLOAT_KEYS:
            values[key] = _parse_scalar(value)
        elif key in _OPTIONAL_FLOAT_KEYS:
            values[key] = None if value.lower() == "none" else _parse_scalar(value)
        elif key in _BOOL_KEYS:
            values[key] = value.lower() in ("1", "true", "yes", "on")
        elif key in _OPTIONAL_STR_KEYS:
            values[key] = None if value.lower() == "none" else value
        else:
            values[key] = value
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), **overrides)


def _run_cell(
    train: TabularDataset,
    test: TabularDataset,
    config: ExperimentConfig,
    rho: float,
    lam: float,
    eps: float,
    h: float,
    n_silos: int,
    seed: int,
) -> TradeoffRecord:
    record = TradeoffRecord(lam=lam, epsilon=eps, h=h, N=n_silos, seed=seed, delta=config.delta, rho=rho)
    start = time.perf_counter()
    try:
        partition = partition_heterogeneous(train, n_silos, h, seed=seed)
        budget = PrivacyBudget(epsilon=eps, delta=config.delta, rho=rho)
        topology = Topology(mode=config.topology, dummy_noise=config.dummy_noise)
        result = run_steffle(
            train,
            partition,
            FairnessSpec(notion=config.notion, lam=lam),
            budget,
            config.round_config(),
            topology=topology,
            seed=seed,
        )
        report = metrics.evaluate(result.theta, test)
        record.error = report.error
        record.dp_violation = report.dp_violation
        record.eo_violation = report.eo_violation
        record.sigma_theta_sq = result.noise.sigma_theta_sq
        record.sigma_w_sq = result.noise.sigma_w_sq
        record.rounds = result.rounds
        record.n_tilde = result.n_tilde
    except Exception as exc:  # record the failure; the sweep goes on
        record.status = f"{type(exc).__name__}: {exc}"
    record.seconds = time.perf_counter() - start
    return record


def summarize_records(records: list[TradeoffRecord]) -> list[TradeoffRecord]:
    """One seed-averaged row per grid point, over its successful trials."""
    groups: dict[tuple, list[TradeoffRecord]] = {}
    order: list[tuple] = []
    for rec in records:
        if rec.summary:
            continue
        key = (rec.lam, rec.epsilon, rec.h, rec.N)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    summaries = []
    for key in order:
        ok = [r for r in groups[key] if r.status == "ok"]
        summary = TradeoffRecord(*key, seed="mean", summary=True)
        if ok:
            for name in ("error", "dp_violation", "eo_violation", "sigma_theta_sq", "sigma_w_sq", "seconds"):
                setattr(summary, name, float(np.mean([getattr(r, name) for r in ok])))
            summary.delta = ok[0].delta
            summary.rounds = ok[0].rounds
            summary.n_tilde = ok[0].n_tilde
            summary.rho = ok[0].rho
        else:
            summary.status = "all trials failed"
        summaries.append(summary)
    return summaries


def run_experiment(config: ExperimentConfig) -> list[TradeoffRecord]:
    """Execute the full sweep; returns per-seed records plus summary rows."""
    dataset = load_csv(config.dataset, config.schema)
    train, test = train_test_split(dataset, config.split_ratio, config.split_seed)
    rho = prepare_fairness_state(FairnessSpec(notion=config.notion, lam=0.0), train).rho

    cells = [
        (point, config.seed_base + trial)
        for point in config.effective_grid()
        for trial in range(config.trials)
    ]

    def work(cell):
        (lam, eps, h, n_silos), seed = cell
        return _run_cell(train, test, config, rho, lam, eps, h, n_silos, seed)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(work, cells))
    else:
        records = [work(cell) for cell in cells]
    return records + summarize_records(records)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.6g}"


def emit_tradeoff_table(records: list[TradeoffRecord], path) -> None:
    """Write the CSV table; summary rows carry 'mean' in the seed column."""
    if not records:
        raise ValueError("no records to write")
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.lam, r.epsilon, r.h, r.N, r.seed, r.error, r.dp_violation,
                    r.eo_violation, r.sigma_theta_sq, r.sigma_w_sq, r.seconds,
                )
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_tradeoff_table(path) -> list[TradeoffRecord]:
    """Parse a table written by ``emit_tradeoff_table``."""
    records = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        for raw in fh:
            parts = raw.strip().split(",")
            if len(parts) != 11:
                raise ValueError(f"malformed row: {raw!r}")
            summary = parts[4] == "mean"
            records.append(
                TradeoffRecord(
                    lam=float(parts[0]),
                    epsilon=float(parts[1]),
                    h=float(parts[2]),
                    N=int(parts[3]),
                    seed="mean" if summary else int(parts[4]),
                    error=float(parts[5]),
                    dp_violation=float(parts[6]),
                    eo_violation=float(parts[7]),
                    sigma_theta_sq=float(parts[8]),
                    sigma_w_sq=float(parts[9]),
                    seconds=float(parts[10]),
                    summary=summary,
                )
            )
    return records


def validate_config(config: ExperimentConfig) -> list[str]:
    """Check a sweep before running it; returns human-readable diagnostics."""
    notes = []
    dataset = load_csv(config.dataset, config.schema)
    train, test = train_test_split(dataset, config.split_ratio, config.split_seed)
    rho = prepare_fairness_state(FairnessSpec(notion=config.notion, lam=0.0), train).rho
    notes.append(f"dataset: {dataset.n} rows, {dataset.d} features, k={dataset.k}, l={dataset.l}")
    notes.append(f"split: {train.n} train / {test.n} test, rho={rho:.4f}")
    cfg = config.round_config()
    for lam, eps, h, n_silos in config.effective_grid():
        if n_silos > train.n:
            raise ValueError(f"grid point N={n_silos} exceeds the training rows")
        n_tilde = train.n // n_silos
        budget = PrivacyBudget(epsilon=eps, delta=config.delta, rho=rho)
        batch = min(cfg.batch_size, n_tilde)
        per_epoch = max(1, n_tilde // batch)
        T = cfg.rounds if cfg.rounds is not None else cfg.epochs * per_epoch
        from .privacy import steffle_noise

        scales = steffle_noise(
            budget, T, n_tilde,
            cfg.clip_threshold if cfg.clip_threshold is not None else 1.0,
            cfg.dual_radius, batch_size=batch,
        )
        notes.append(
            f"grid lam={lam} eps={eps} h={h} N={n_silos}: T={T}, n_tilde={n_tilde}, "
            f"sigma_theta_sq={scales.sigma_theta_sq:.4g}, sigma_w_sq={scales.sigma_w_sq:.4g}"
        )
    return notes
