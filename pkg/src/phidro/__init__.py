"""Distributionally robust learning over phi-divergence balls.

The package provides an exact solver for the worst-case reweighting of a
finite loss vector inside a KL or chi-squared divergence ball, a
subgradient method that grows its without-replacement subsample between
iterations, a dual stochastic-gradient baseline, and a small experiment
harness that writes machine-readable traces.
"""

from phidro.divergence import (
    DivergenceKind,
    DivergenceSpec,
    phi_conjugate,
    phi_divergence,
    phi_value,
    uniform_pmf,
)
from phidro.config import ConfigError, ExperimentConfig, load_config
from phidro.data import (
    Dataset,
    TableSchema,
    encode_octamer,
    load_hiv1,
    load_table,
    make_synthetic,
    train_test_split,
)
from phidro.inner import InnerSolution, SolutionCase, SolverError, oracle_inner, solve_inner
from phidro.losses import (
    LossKind,
    LossModel,
    batch_objective_vector,
    loss_gradient,
    loss_value,
    robust_subgradient,
    step_size_bound,
)
from phidro.optimizer import (
    RunTrace,
    SgdConfig,
    TraceRow,
    run_dssd,
    run_dual_sgd,
    run_full_gradient,
)
from phidro.sampling import (
    BudgetRule,
    GrowthSchedule,
    IndexDraw,
    SampleMode,
    ScheduleKind,
    WorkLedger,
    inflated_budget,
    sample_indices,
    schedule_next,
    work_ledger_update,
    work_units,
)

__version__ = "0.1.0"

__all__ = [
    "DivergenceKind",
    "DivergenceSpec",
    "phi_conjugate",
    "phi_divergence",
    "phi_value",
    "uniform_pmf",
    "InnerSolution",
    "SolutionCase",
    "solve_inner",
    "oracle_inner",
    "SolverError",
    "SampleMode",
    "IndexDraw",
    "sample_indices",
    "BudgetRule",
    "inflated_budget",
    "ScheduleKind",
    "GrowthSchedule",
    "schedule_next",
    "work_units",
    "WorkLedger",
    "work_ledger_update",
    "LossKind",
    "LossModel",
    "loss_value",
    "loss_gradient",
    "batch_objective_vector",
    "robust_subgradient",
    "step_size_bound",
    "SgdConfig",
    "TraceRow",
    "RunTrace",
    "run_dssd",
    "run_full_gradient",
    "run_dual_sgd",
    "Dataset",
    "TableSchema",
    "load_table",
    "load_hiv1",
    "encode_octamer",
    "train_test_split",
    "make_synthetic",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "__version__",
]
