"""Fair, record-level differentially private federated learning simulator."""

from .dataio import (
    SensitiveDistribution,
    SiloPartition,
    TabularDataset,
    load_csv,
    partition_heterogeneous,
    read_schema,
    sensitive_distribution,
    sensitive_distribution_by_label,
    train_test_split,
)
from .fairness import (
    DualMatrix,
    EmpiricalJoint,
    FairnessSpec,
    chi2_dem_parity,
    chi2_eq_odds,
    fermi_objective,
    inner_maximizer,
    psi,
    psi_grads,
)
from .federation import (
    MinMaxProblem,
    RoundConfig,
    Smoothness,
    SteffleResult,
    Topology,
    project_ball,
    read_trace,
    route_round,
    run_fed_sgda,
    run_steffle,
    sgda_hyperparams,
    write_trace,
)
from .harness import (
    ExperimentConfig,
    TradeoffRecord,
    emit_tradeoff_table,
    load_config,
    read_tradeoff_table,
    run_experiment,
)
from .metrics import (
    EvalReport,
    dem_parity_violation,
    eq_odds_violation,
    evaluate,
    misclassification_error,
)
from .model import ModelParams, loss_and_grad, predict_probs, predict_probs_batch, probs_jacobian
from .privacy import (
    NoiseScales,
    PrivacyBudget,
    SensitivityBound,
    clip,
    perturb,
    sensitivity,
    sgda_noise,
    steffle_noise,
    stream,
)

__version__ = "0.1.0"
