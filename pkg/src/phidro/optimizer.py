"""Outer training loops and exact robust-objective evaluation.

Three methods share one trace format: subgradient descent on a growing
without-replacement subsample (the main algorithm), deterministic
full-gradient descent on the exact robust objective (the reference),
and stochastic gradient descent on the dual of the inner problem (the
baseline whose instability near alpha = 0 motivates the main method).

Reproducibility contract: all randomness flows through substreams keyed
by (seed, t) -- iterate initialization uses (seed, 0), iteration t of a
sampled run uses (seed, t + 1), the dual baseline's index stream uses
(seed, 1).  Given identical config, data, and seed the resulting traces
are bitwise identical except for recorded wall times.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from phidro.divergence import DivergenceKind, DivergenceSpec, phi_conjugate
from phidro.inner import SolverError, solve_inner
from phidro.losses import (
    LossModel,
    batch_objective_vector,
    loss_gradient,
    loss_value,
    robust_subgradient,
)
from phidro.sampling import (
    BudgetRule,
    GrowthSchedule,
    SampleMode,
    ScheduleKind,
    WorkLedger,
    inflated_budget,
    sample_indices,
    schedule_next,
    work_ledger_update,
)

__all__ = [
    "ALPHA_FLOOR",
    "KL_CONJUGATE_CLAMP",
    "SgdConfig",
    "TraceRow",
    "RunTrace",
    "initial_theta",
    "misclassification_rate",
    "robust_objective",
    "evaluate_state",
    "run_dssd",
    "run_full_gradient",
    "reference_optimum",
    "dual_objective",
    "dual_sample_gradients",
    "run_dual_sgd",
]

ALPHA_FLOOR = 1e-6
KL_CONJUGATE_CLAMP = 30.0
_EVENT_DETAIL_CAP = 200


@dataclass(frozen=True)
class SgdConfig:
    """Settings shared by the outer training loops.

    ``gamma`` may be zero (a frozen run still records objectives).  The
    caps are optional: ``max_sampled_iters`` bounds the growing phase
    and is required for fixed-size schedules, which never reach the full
    data on their own; ``work_budget`` stops a run once cumulative
    abstract work crosses it, letting schedules be compared at equal
    spend.
    """

    gamma: float
    schedule: GrowthSchedule
    budget: BudgetRule
    kind: DivergenceKind
    seed: int
    max_full_iters: int = 100
    max_sampled_iters: int | None = None
    work_budget: float | None = None
    theta0: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not (self.gamma >= 0.0):
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.max_full_iters < 0:
            raise ValueError(f"max_full_iters must be >= 0, got {self.max_full_iters}")
        if self.max_sampled_iters is not None and self.max_sampled_iters < 0:
            raise ValueError(
                f"max_sampled_iters must be >= 0, got {self.max_sampled_iters}"
            )
        if self.work_budget is not None and not (self.work_budget > 0.0):
            raise ValueError(f"work_budget must be positive, got {self.work_budget}")


@dataclass(frozen=True)
class TraceRow:
    """One iteration of any outer method, in trace-file column order."""

    t: int
    m: int
    w: float
    w_total: float
    wall_ms: float
    robust_train: float
    erm_train: float
    test_err: float
    alpha: float
    lam: float
    grad_norm: float


@dataclass
class RunTrace:
    rows: list
    theta: np.ndarray
    events: list = field(default_factory=list)
    error: str | None = None


class _EventLog:
    """Collects events, keeping detail rows bounded per event type."""

    def __init__(self) -> None:
        self.entries = []
        self._counts = {}

    def record(self, t: int, event: str) -> None:
        n = self._counts.get(event, 0) + 1
        self._counts[event] = n
        if n <= _EVENT_DETAIL_CAP:
            self.entries.append({"t": t, "event": event})

    def finish(self) -> list:
        for event, n in sorted(self._counts.items()):
            self.entries.append({"event": event, "count": n})
        return self.entries


def initial_theta(config: SgdConfig, dim: int) -> np.ndarray:
    """Explicit start point if configured, else U[-1, 1] from (seed, 0)."""
    if config.theta0 is not None:
        theta = np.asarray(config.theta0, dtype=np.float64)
        if theta.shape != (dim,):
            raise ValueError(f"theta0 has shape {theta.shape}, expected ({dim},)")
        return theta.copy()
    rng = np.random.default_rng([config.seed, 0])
    return rng.uniform(-1.0, 1.0, size=dim)


def misclassification_rate(theta, data) -> float:
    preds = np.where(data.x @ np.asarray(theta) >= 0.0, 1.0, -1.0)
    return float(np.mean(preds != data.y))


def robust_objective(theta, data, model: LossModel, spec: DivergenceSpec) -> float:
    """Exact worst-case training objective at ``theta`` over the full data."""
    idx = np.arange(data.x.shape[0])
    z = batch_objective_vector(model, theta, data, idx)
    return solve_inner(z, spec.rho, spec.kind).objective


def evaluate_state(theta, data, model: LossModel, spec: DivergenceSpec, test_data=None):
    """(robust objective, mean train loss, test error) at ``theta``.

    The test error is NaN when no held-out set is supplied.  All three
    numbers are computed the same way by every outer method, so traces
    are comparable across methods.
    """
    idx = np.arange(data.x.shape[0])
    z = batch_objective_vector(model, theta, data, idx)
    robust = solve_inner(z, spec.rho, spec.kind).objective
    erm = float(np.mean(z))
    test = math.nan if test_data is None else misclassification_rate(theta, test_data)
    return robust, erm, test


def _work_exhausted(config: SgdConfig, ledger: WorkLedger) -> bool:
    return config.work_budget is not None and ledger.cumulative >= config.work_budget


def run_dssd(config: SgdConfig, data, model: LossModel, *, test_data=None) -> RunTrace:
    """Subgradient descent on a growing without-replacement subsample.

    While the subsample is smaller than the data, each iteration draws
    fresh indices from substream (seed, t + 1), solves the inner problem
    at the inflated budget for the current size, and steps against the
    worst-case-weighted gradient.  Once the schedule reaches the full
    data the loop switches to at most ``max_full_iters`` deterministic
    full-gradient steps.
    """
    n = data.x.shape[0]
    sched = config.schedule
    if sched.full_size != n:
        raise ValueError(
            f"schedule is sized for {sched.full_size} samples, data has {n}"
        )
    if (
        sched.kind is ScheduleKind.FIXED
        and config.max_sampled_iters is None
        and config.work_budget is None
    ):
        raise ValueError("fixed-size schedules need max_sampled_iters or work_budget")

    theta = initial_theta(config, model.dim)
    eval_spec = DivergenceSpec(config.kind, config.budget.rho)
    ledger = WorkLedger()
    rows: list = []
    events = _EventLog()
    t, m = 0, sched.start_size

    while m < n:
        if _work_exhausted(config, ledger):
            break
        if config.max_sampled_iters is not None and t >= config.max_sampled_iters:
            break
        started = time.perf_counter()
        rng = np.random.default_rng([config.seed, t + 1])
        draw = sample_indices(n, m, SampleMode.WITHOUT_REPLACEMENT, rng)
        z = batch_objective_vector(model, theta, data, draw.indices)
        rho_m = inflated_budget(config.budget, m, n)
        try:
            sol = solve_inner(z, rho_m, config.kind)
        except SolverError as exc:
            events.record(t, "solver_failure")
            return RunTrace(rows, theta, events.finish(), error=str(exc))
        grad = robust_subgradient(model, theta, data, draw.indices, sol.pmf)
        work_ledger_update(ledger, m, config.kind)
        robust, erm, test = evaluate_state(theta, data, model, eval_spec, test_data)
        rows.append(
            TraceRow(
                t=t,
                m=m,
                w=ledger.per_iteration[-1],
                w_total=ledger.cumulative,
                wall_ms=1e3 * (time.perf_counter() - started),
                robust_train=robust,
                erm_train=erm,
                test_err=test,
                alpha=sol.alpha,
                lam=sol.lam,
                grad_norm=float(np.linalg.norm(grad)),
            )
        )
        theta = theta - config.gamma * grad
        m = schedule_next(sched, t, m)
        t += 1

    full_idx = np.arange(n)
    for _ in range(config.max_full_iters):
        if m < n or _work_exhausted(config, ledger):
            break
        started = time.perf_counter()
        z = batch_objective_vector(model, theta, data, full_idx)
        try:
            sol = solve_inner(z, config.budget.rho, config.kind)
        except SolverError as exc:
            events.record(t, "solver_failure")
            return RunTrace(rows, theta, events.finish(), error=str(exc))
        grad = robust_subgradient(model, theta, data, full_idx, sol.pmf)
        work_ledger_update(ledger, n, config.kind)
        test = math.nan if test_data is None else misclassification_rate(theta, test_data)
        rows.append(
            TraceRow(
                t=t,
                m=n,
                w=ledger.per_iteration[-1],
                w_total=ledger.cumulative,
                wall_ms=1e3 * (time.perf_counter() - started),
                robust_train=sol.objective,
                erm_train=float(np.mean(z)),
                test_err=test,
                alpha=sol.alpha,
                lam=sol.lam,
                grad_norm=float(np.linalg.norm(grad)),
            )
        )
        theta = theta - config.gamma * grad
        t += 1

    return RunTrace(rows, theta, events.finish())


def run_full_gradient(
    config: SgdConfig,
    data,
    model: LossModel,
    *,
    n_iters: int | None = None,
    grad_tol: float = 0.0,
    test_data=None,
) -> RunTrace:
    """Deterministic descent on the exact robust objective.

    The schedule is ignored: every step uses the full support and the
    uninflated budget.  Stops early once the step gradient norm falls to
    ``grad_tol`` (if positive).
    """
    n = data.x.shape[0]
    iters = config.max_full_iters if n_iters is None else n_iters
    theta = initial_theta(config, model.dim)
    ledger = WorkLedger()
    rows: list = []
    events = _EventLog()
    full_idx = np.arange(n)

    for t in range(iters):
        if _work_exhausted(config, ledger):
            break
        started = time.perf_counter()
        z = batch_objective_vector(model, theta, data, full_idx)
        try:
            sol = solve_inner(z, config.budget.rho, config.kind)
        except SolverError as exc:
            events.record(t, "solver_failure")
            return RunTrace(rows, theta, events.finish(), error=str(exc))
        grad = robust_subgradient(model, theta, data, full_idx, sol.pmf)
        gnorm = float(np.linalg.norm(grad))
        work_ledger_update(ledger, n, config.kind)
        test = math.nan if test_data is None else misclassification_rate(theta, test_data)
        rows.append(
            TraceRow(
                t=t,
                m=n,
                w=ledger.per_iteration[-1],
                w_total=ledger.cumulative,
                wall_ms=1e3 * (time.perf_counter() - started),
                robust_train=sol.objective,
                erm_train=float(np.mean(z)),
                test_err=test,
                alpha=sol.alpha,
                lam=sol.lam,
                grad_norm=gnorm,
            )
        )
        theta = theta - config.gamma * grad
        if grad_tol > 0.0 and gnorm <= grad_tol:
            break

    return RunTrace(rows, theta, events.finish())


def reference_optimum(
    config: SgdConfig,
    data,
    model: LossModel,
    *,
    tol: float = 1e-10,
    max_iters: int = 200_000,
):
    """Tightly converged full-gradient solution (theta, robust objective).

    Used as the optimum proxy for optimality-gap diagnostics; raises if
    the gradient norm does not reach ``tol`` within ``max_iters``.
    """
    n = data.x.shape[0]
    theta = initial_theta(config, model.dim)
    full_idx = np.arange(n)
    for _ in range(max_iters):
        z = batch_objective_vector(model, theta, data, full_idx)
        sol = solve_inner(z, config.budget.rho, config.kind)
        grad = robust_subgradient(model, theta, data, full_idx, sol.pmf)
        if float(np.linalg.norm(grad)) <= tol:
            return theta, sol.objective
        theta = theta - config.gamma * grad
    raise SolverError(
        f"full-gradient reference did not reach gradient norm {tol} "
        f"within {max_iters} iterations"
    )


def _conjugate_grad(kind: DivergenceKind, s: float) -> float:
    # derivative of the convex conjugate of the divergence generator
    if kind is DivergenceKind.KL:
        return math.exp(s)
    return 1.0 + 0.5 * s if s >= -2.0 else 0.0


def dual_objective(theta, alpha: float, lam: float, data, model: LossModel, spec) -> float:
    """Full-sum dual objective alpha*rho + lam + (alpha/n) sum phi*((l-lam)/alpha)."""
    if not (alpha > 0.0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    idx = np.arange(data.x.shape[0])
    z = batch_objective_vector(model, theta, data, idx)
    s = (z - lam) / alpha
    return float(alpha * spec.rho + lam + alpha * np.mean(phi_conjugate(spec.kind, s)))


def dual_sample_gradients(
    model: LossModel, theta, x, y, alpha: float, lam: float, rho: float, kind: DivergenceKind
):
    """Stochastic gradients of the single-sample dual summand.

    Returns (g_theta, g_alpha, g_lam, clamped) for the summand
    alpha*rho + lam + alpha*phi*((l-lam)/alpha); ``clamped`` reports
    whether the KL conjugate argument was cut off to avoid overflow.
    """
    l_val = loss_value(model, theta, x, y)
    s = (l_val - lam) / alpha
    clamped = False
    if kind is DivergenceKind.KL and s > KL_CONJUGATE_CLAMP:
        s = KL_CONJUGATE_CLAMP
        clamped = True
    slope = _conjugate_grad(kind, s)
    conj = float(phi_conjugate(kind, s))
    g_theta = slope * loss_gradient(model, theta, x, y)
    g_lam = 1.0 - slope
    g_alpha = rho + conj - s * slope
    return g_theta, g_alpha, g_lam, clamped


def run_dual_sgd(
    config: SgdConfig,
    data,
    model: LossModel,
    *,
    n_iters: int = 2000,
    trace_every: int | None = None,
    test_data=None,
) -> RunTrace:
    """Single-sample SGD on the dual variables (theta, alpha, lam).

    alpha is projected onto [ALPHA_FLOOR, inf) after each step; floor
    hits and KL conjugate clamps are recorded as events, since runs that
    drive alpha toward zero are exactly the unstable ones this baseline
    exists to exhibit.  One iteration costs one sample of work.
    """
    n = data.x.shape[0]
    if trace_every is None:
        trace_every = max(1, n_iters // 200)
    theta = initial_theta(config, model.dim)
    alpha, lam = 1.0, 0.0
    stream = np.random.default_rng([config.seed, 1])
    eval_spec = DivergenceSpec(config.kind, config.budget.rho)
    ledger = WorkLedger()
    rows: list = []
    events = _EventLog()
    started = time.perf_counter()

    for t in range(n_iters):
        if _work_exhausted(config, ledger):
            break
        i = int(stream.integers(n))
        g_theta, g_alpha, g_lam, clamped = dual_sample_gradients(
            model, theta, data.x[i], data.y[i], alpha, lam, config.budget.rho, config.kind
        )
        if clamped:
            events.record(t, "conjugate_clamp")
        theta = theta - config.gamma * g_theta
        lam = lam - config.gamma * g_lam
        alpha = alpha - config.gamma * g_alpha
        if alpha < ALPHA_FLOOR:
            alpha = ALPHA_FLOOR
            events.record(t, "alpha_floor")
        # one sample touched per iteration, whatever the divergence
        ledger.per_iteration.append(1.0)
        ledger.cumulative += 1.0
        if (t + 1) % trace_every == 0 or t == n_iters - 1:
            robust, erm, test = evaluate_state(theta, data, model, eval_spec, test_data)
            rows.append(
                TraceRow(
                    t=t,
                    m=1,
                    w=1.0,
                    w_total=ledger.cumulative,
                    wall_ms=1e3 * (time.perf_counter() - started),
                    robust_train=robust,
                    erm_train=erm,
                    test_err=test,
                    alpha=alpha,
                    lam=lam,
                    grad_norm=float(np.linalg.norm(g_theta)),
                )
            )
            started = time.perf_counter()

    return RunTrace(rows, theta, events.finish())
