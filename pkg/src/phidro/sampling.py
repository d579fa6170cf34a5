"""Index subsampling, budget inflation, growth schedules, work accounting.

The outer method trains on a subsample of the data that grows across
iterations.  This module owns the four pieces of bookkeeping that come
with that: drawing index sets (without replacement by default, with
replacement kept for comparison), widening the divergence budget to
absorb subsampling bias, deciding the next subsample size, and tracking
abstract per-iteration work so schedules can be compared independently
of the machine.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from phidro.divergence import DivergenceKind

__all__ = [
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
]


class SampleMode(enum.Enum):
    WITHOUT_REPLACEMENT = "without_replacement"
    WITH_REPLACEMENT = "with_replacement"


@dataclass(frozen=True)
class IndexDraw:
    """A drawn index set together with its distinct-count statistic.

    ``n_distinct`` equals the sample size without replacement; with
    replacement it is the number of unique indices, the quantity whose
    slow growth motivates preferring without-replacement draws.
    """

    indices: np.ndarray
    n_distinct: int


def sample_indices(n: int, m: int, mode: SampleMode, rng) -> IndexDraw:
    """Draw ``m`` indices from ``range(n)`` under the given mode.

    Without replacement every size-``m`` subset is equiprobable and
    requires ``m <= n``; with replacement duplicates are retained.
    """
    if n < 1:
        raise ValueError(f"population size must be positive, got {n}")
    if m < 1:
        raise ValueError(f"sample size must be positive, got {m}")
    if mode is SampleMode.WITHOUT_REPLACEMENT:
        if m > n:
            raise ValueError(f"cannot draw {m} distinct indices from {n}")
        idx = rng.choice(n, size=m, replace=False)
        return IndexDraw(indices=idx.astype(np.int64), n_distinct=m)
    if mode is SampleMode.WITH_REPLACEMENT:
        idx = rng.integers(0, n, size=m, dtype=np.int64)
        return IndexDraw(indices=idx, n_distinct=int(np.unique(idx).size))
    raise ValueError(f"unknown sample mode: {mode!r}")


@dataclass(frozen=True)
class BudgetRule:
    """Parameters of the subsample-size-dependent budget widening.

    The divergence budget used on a subsample of size ``m`` out of ``n``
    is ``rho + c_infl * (1/m - 1/n)**((1 - delta)/2)``, shrinking back
    to ``rho`` at the full data.  ``c_infl = 0`` disables the widening,
    which together with ``rho = 0`` pins the worst case to the uniform
    pmf (the plain ERM reduction).
    """

    rho: float
    c_infl: float = 1.0
    delta: float = 0.05

    def __post_init__(self) -> None:
        if not (self.rho >= 0.0):
            raise ValueError(f"rho must be nonnegative, got {self.rho}")
        if not (self.c_infl >= 0.0):
            raise ValueError(f"c_infl must be nonnegative, got {self.c_infl}")
        if not (0.0 < self.delta <= 0.5):
            raise ValueError(f"delta must lie in (0, 0.5], got {self.delta}")


def inflated_budget(rule: BudgetRule, m: int, n: int) -> float:
    """Budget for a size-``m`` subsample; exactly ``rule.rho`` at m == n."""
    if not (1 <= m <= n):
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if m == n:
        return rule.rho
    gap = 1.0 / m - 1.0 / n
    return rule.rho + rule.c_infl * gap ** (0.5 * (1.0 - rule.delta))


class ScheduleKind(enum.Enum):
    GEOMETRIC = "geometric"
    POLYNOMIAL = "polynomial"
    FIXED = "fixed"


@dataclass(frozen=True)
class GrowthSchedule:
    """How the subsample size evolves from ``start_size`` toward ``full_size``.

    Geometric keeps the ratio of consecutive sizes constant: the next
    size is ``ceil(previous / ratio)`` with ``ratio`` in (0, 1).
    Polynomial uses the iteration-dependent ratio
    ``1 - 1/(t + 2)**power``, which for ``power = 1`` grows the size
    roughly linearly.  Fixed keeps the size constant and never reaches
    the full data; it exists as a baseline, not as a convergent method.
    """

    kind: ScheduleKind
    start_size: int
    full_size: int
    ratio: float | None = None
    power: float | None = None

    def __post_init__(self) -> None:
        if not (1 <= self.start_size <= self.full_size):
            raise ValueError(
                f"need 1 <= start_size <= full_size, got "
                f"{self.start_size}, {self.full_size}"
            )
        if self.kind is ScheduleKind.GEOMETRIC:
            if self.ratio is None or not (0.0 < self.ratio < 1.0):
                raise ValueError(f"geometric ratio must lie in (0, 1), got {self.ratio}")
        elif self.kind is ScheduleKind.POLYNOMIAL:
            if self.power is None or not (self.power > 0.0):
                raise ValueError(f"polynomial power must be positive, got {self.power}")

    def t_max(self) -> int:
        """Iterations until a geometric schedule reaches the full data."""
        if self.kind is not ScheduleKind.GEOMETRIC:
            raise ValueError(f"t_max is defined for geometric schedules, not {self.kind}")
        if self.start_size == self.full_size:
            return 0
        steps = math.log(self.full_size / self.start_size) / (-math.log(self.ratio))
        return int(math.ceil(steps - 1e-9))


def schedule_next(schedule: GrowthSchedule, t: int, m_t: int) -> int:
    """Subsample size for iteration ``t + 1`` given size ``m_t`` at ``t``."""
    if m_t > schedule.full_size:
        raise ValueError(f"current size {m_t} exceeds full size {schedule.full_size}")
    if schedule.kind is ScheduleKind.FIXED:
        return m_t
    if m_t == schedule.full_size:
        return schedule.full_size
    if schedule.kind is ScheduleKind.GEOMETRIC:
        ratio = schedule.ratio
    else:
        ratio = 1.0 - 1.0 / (t + 2.0) ** schedule.power
        if ratio <= 0.0:
            # extremely aggressive powers at t=0 amount to jumping straight up
            return schedule.full_size
    nxt = math.ceil(m_t / ratio - 1e-12)
    # guard the strict-increase contract against float rounding at the ceil
    nxt = max(nxt, m_t + 1)
    return min(schedule.full_size, nxt)


def work_units(m: int, kind: DivergenceKind) -> float:
    """Abstract cost of one inner solve on ``m`` samples.

    Linear for KL, m*log2(m) for chi-squared, mirroring the solver's
    sort bound; wall-clock time is recorded separately in traces.
    """
    if m < 1:
        raise ValueError(f"sample size must be positive, got {m}")
    if kind is DivergenceKind.KL:
        return float(m)
    return float(m) * math.log2(m)


@dataclass
class WorkLedger:
    """Per-iteration work amounts and their exact running total."""

    per_iteration: list = field(default_factory=list)
    cumulative: float = 0.0


def work_ledger_update(ledger: WorkLedger, m: int, kind: DivergenceKind) -> WorkLedger:
    """Append the work of one iteration on ``m`` samples; returns the ledger."""
    w = work_units(m, kind)
    ledger.per_iteration.append(w)
    ledger.cumulative += w
    return ledger
