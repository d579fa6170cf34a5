"""Experiment configuration: a TOML file with fail-closed validation.

Unknown keys are errors rather than warnings: a typo in a divergence
budget or growth ratio would silently invalidate an experiment, so the
loader rejects anything it does not recognize and names the field in
the message.  Every key has a default listed in DEFAULTS; a config file
only needs the keys it wants to change.
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .divergence import DivergenceKind
from .sampling import BudgetRule, GrowthSchedule, ScheduleKind

__all__ = [
    "ConfigError",
    "DatasetSpec",
    "ExperimentConfig",
    "DEFAULTS",
    "OUT_DIR_ENV",
    "load_config",
    "parse_config",
]

OUT_DIR_ENV = "PHIDRO_OUT_DIR"

# every recognized key with its default; None marks optional keys that
# stay unset unless given
DEFAULTS = {
    "seeds": [0],
    "out_dir": None,  # falls back to $PHIDRO_OUT_DIR, then "runs"
    "methods": ["dssd", "full"],
    "dataset": {
        "kind": "synthetic",  # synthetic | table | octamer
        "n": 512,
        "d": 5,
        "separation": 1.0,
        "label_noise": 0.0,
        "scale": 1.0,
        "seed": 0,
        "test_fraction": 0.0,  # 0 disables the test split
        "path": None,  # required for table and octamer kinds
        "schema": "adult",  # named schema for table kind
    },
    "model": {
        "kind": "logistic",  # logistic | ridge
        "mu": 0.0,  # ridge strength, must be > 0 for ridge
    },
    "divergence": {
        "kind": "chi2",  # kl | chi2
        "rho": 0.1,
    },
    "budget": {
        "c_infl": 1.0,
        "delta": 0.05,
    },
    "schedule": {
        "kind": "geometric",  # geometric | polynomial | fixed
        "start_size": 16,
        "ratio": 0.5,  # geometric shrink factor nu
        "power": 1.0,  # polynomial growth exponent
    },
    "optimizer": {
        "gamma": 0.1,
        "max_full_iters": 100,
        "max_sampled_iters": None,
        "work_budget": None,
    },
}

_DIVERGENCE_NAMES = {"kl": DivergenceKind.KL, "chi2": DivergenceKind.CHI2}
_SCHEDULE_NAMES = {
    "geometric": ScheduleKind.GEOMETRIC,
    "polynomial": ScheduleKind.POLYNOMIAL,
    "fixed": ScheduleKind.FIXED,
}
_METHOD_NAMES = ("dssd", "full", "dual")


class ConfigError(Exception):
    """Invalid or unknown configuration content."""


@dataclass(frozen=True)
class DatasetSpec:
    kind: str
    n: int
    d: int
    separation: float
    label_noise: float
    scale: float
    seed: int
    test_fraction: float
    path: str | None
    schema: str


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings, independent of any loaded data."""

    seeds: tuple
    out_dir: str
    methods: tuple
    dataset: DatasetSpec
    model_kind: str
    mu: float
    divergence_kind: DivergenceKind
    rho: float
    budget: BudgetRule
    schedule_kind: ScheduleKind
    start_size: int
    ratio: float
    power: float
    gamma: float
    max_full_iters: int
    max_sampled_iters: int | None
    work_budget: float | None
    resolved: dict = None

    def build_schedule(self, full_size: int) -> GrowthSchedule:
        """Concrete growth schedule once the training-set size is known."""
        start = min(self.start_size, full_size)
        if self.schedule_kind is ScheduleKind.GEOMETRIC:
            return GrowthSchedule(
                kind=self.schedule_kind,
                start_size=start,
                full_size=full_size,
                ratio=self.ratio,
            )
        if self.schedule_kind is ScheduleKind.POLYNOMIAL:
            return GrowthSchedule(
                kind=self.schedule_kind,
                start_size=start,
                full_size=full_size,
                power=self.power,
            )
        return GrowthSchedule(
            kind=self.schedule_kind, start_size=start, full_size=full_size
        )


def _check_unknown(section: dict, allowed, where: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {where}{key!r}")


def _merged(raw: dict) -> dict:
    _check_unknown(raw, DEFAULTS, "")
    merged = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if isinstance(DEFAULTS[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{key!r} must be a section, got {value!r}")
            _check_unknown(value, DEFAULTS[key], f"{key}.")
            merged[key].update(value)
        else:
            merged[key] = value
    return merged


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def parse_config(raw: dict, base_dir=None) -> ExperimentConfig:
    """Validate a parsed mapping; ``base_dir`` anchors relative paths."""
    cfg = _merged(raw)

    seeds = cfg["seeds"]
    _require(
        isinstance(seeds, list) and len(seeds) > 0, "seeds: need at least one seed"
    )
    _require(
        all(isinstance(s, int) for s in seeds), "seeds: entries must be integers"
    )

    methods = cfg["methods"]
    for method in methods:
        _require(method in _METHOD_NAMES, f"methods: unknown method {method!r}")
    _require(len(methods) > 0, "methods: need at least one method")

    ds = cfg["dataset"]
    _require(
        ds["kind"] in ("synthetic", "table", "octamer"),
        f"dataset.kind: unknown kind {ds['kind']!r}",
    )
    if ds["kind"] == "synthetic":
        _require(int(ds["n"]) >= 2, f"dataset.n: need >= 2 samples, got {ds['n']}")
        _require(int(ds["d"]) >= 1, f"dataset.d: need >= 1 features, got {ds['d']}")
        _require(
            0.0 <= float(ds["label_noise"]) < 1.0,
            f"dataset.label_noise: must lie in [0, 1), got {ds['label_noise']}",
        )
        _require(
            float(ds["scale"]) > 0.0,
            f"dataset.scale: must be positive, got {ds['scale']}",
        )
        path = None
    else:
        _require(ds["path"] is not None, f"dataset.path: required for {ds['kind']} data")
        path = Path(ds["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        _require(path.exists(), f"dataset.path: {path} does not exist")
        path = str(path)
    if ds["kind"] == "table":
        _require(
            ds["schema"] == "adult", f"dataset.schema: unknown schema {ds['schema']!r}"
        )
    _require(
        0.0 <= float(ds["test_fraction"]) < 1.0,
        f"dataset.test_fraction: must lie in [0, 1), got {ds['test_fraction']}",
    )

    model = cfg["model"]
    _require(
        model["kind"] in ("logistic", "ridge"),
        f"model.kind: unknown kind {model['kind']!r}",
    )
    mu = float(model["mu"])
    if model["kind"] == "ridge":
        _require(mu > 0.0, f"model.mu: ridge needs mu > 0, got {mu}")
    else:
        _require(mu == 0.0, f"model.mu: plain logistic needs mu = 0, got {mu}")

    div = cfg["divergence"]
    _require(
        div["kind"] in _DIVERGENCE_NAMES,
        f"divergence.kind: unknown kind {div['kind']!r}",
    )
    rho = float(div["rho"])
    _require(rho >= 0.0, f"divergence.rho: must be >= 0, got {rho}")

    bud = cfg["budget"]
    try:
        budget = BudgetRule(
            rho=rho, c_infl=float(bud["c_infl"]), delta=float(bud["delta"])
        )
    except ValueError as exc:
        raise ConfigError(f"budget: {exc}") from None

    sched = cfg["schedule"]
    _require(
        sched["kind"] in _SCHEDULE_NAMES,
        f"schedule.kind: unknown kind {sched['kind']!r}",
    )
    _require(
        int(sched["start_size"]) >= 1,
        f"schedule.start_size: must be >= 1, got {sched['start_size']}",
    )
    _require(
        0.0 < float(sched["ratio"]) < 1.0,
        f"schedule.ratio: must lie in (0, 1), got {sched['ratio']}",
    )
    _require(
        float(sched["power"]) > 0.0,
        f"schedule.power: must be > 0, got {sched['power']}",
    )

    opt = cfg["optimizer"]
    _require(float(opt["gamma"]) >= 0.0, f"optimizer.gamma: must be >= 0, got {opt['gamma']}")
    _require(
        int(opt["max_full_iters"]) >= 0,
        f"optimizer.max_full_iters: must be >= 0, got {opt['max_full_iters']}",
    )
    if opt["max_sampled_iters"] is not None:
        _require(
            int(opt["max_sampled_iters"]) >= 0,
            f"optimizer.max_sampled_iters: must be >= 0, got {opt['max_sampled_iters']}",
        )
    if opt["work_budget"] is not None:
        _require(
            float(opt["work_budget"]) > 0.0,
            f"optimizer.work_budget: must be > 0, got {opt['work_budget']}",
        )
    if sched["kind"] == "fixed":
        _require(
            opt["max_sampled_iters"] is not None or opt["work_budget"] is not None,
            "schedule.kind: 'fixed' never reaches the full data, so "
            "optimizer.max_sampled_iters or optimizer.work_budget is required",
        )

    out_dir = cfg["out_dir"]
    if out_dir is None:
        out_dir = os.environ.get(OUT_DIR_ENV, "runs")

    resolved = copy.deepcopy(cfg)
    resolved["out_dir"] = out_dir
    resolved["dataset"]["path"] = path

    return ExperimentConfig(
        seeds=tuple(seeds),
        out_dir=str(out_dir),
        methods=tuple(methods),
        dataset=DatasetSpec(
            kind=ds["kind"],
            n=int(ds["n"]),
            d=int(ds["d"]),
            separation=float(ds["separation"]),
            label_noise=float(ds["label_noise"]),
            scale=float(ds["scale"]),
            seed=int(ds["seed"]),
            test_fraction=float(ds["test_fraction"]),
            path=path,
            schema=ds["schema"],
        ),
        model_kind=model["kind"],
        mu=mu,
        divergence_kind=_DIVERGENCE_NAMES[div["kind"]],
        rho=rho,
        budget=budget,
        schedule_kind=_SCHEDULE_NAMES[sched["kind"]],
        start_size=int(sched["start_size"]),
        ratio=float(sched["ratio"]),
        power=float(sched["power"]),
        gamma=float(opt["gamma"]),
        max_full_iters=int(opt["max_full_iters"]),
        max_sampled_iters=None
        if opt["max_sampled_iters"] is None
        else int(opt["max_sampled_iters"]),
        work_budget=None if opt["work_budget"] is None else float(opt["work_budget"]),
        resolved=resolved,
    )


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw, base_dir=path.parent)
