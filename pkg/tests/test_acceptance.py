"""Acceptance checklist for the solver library and experiment harness.

One test per criterion, in order: inner-solver correctness against a
brute-force oracle, closed-form two-point cases, solver cost scaling,
finite-population sampling moments, the subsample bias rate, growth
schedule efficiency, degenerate reductions, finite-difference gradient
agreement, the end-to-end work-advantage experiment, and coverage of the
per-module property suites.  Each test records a single line with the
measured statistic and its tolerance, shown in the run summary.
"""

import csv
import gc
import json
import re
import time
from pathlib import Path

import numpy as np

from conftest import record_acceptance
from oracles import central_difference_gradient
from standins import write_census_corpus, write_octamer_corpus

from phidro.config import parse_config
from phidro.data import make_synthetic
from phidro.divergence import (
    DivergenceKind,
    DivergenceSpec,
    phi_conjugate,
    phi_divergence,
    uniform_pmf,
)
from phidro.harness import build_model, cmd_bias, cmd_run, cmd_schedules, materialize_dataset
from phidro.inner import oracle_inner, solve_inner
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
    SgdConfig,
    dual_sample_gradients,
    evaluate_state,
    initial_theta,
    robust_objective,
    run_dssd,
)
from phidro.sampling import (
    BudgetRule,
    GrowthSchedule,
    SampleMode,
    ScheduleKind,
    sample_indices,
    schedule_next,
    work_units,
)
from phidro.traces import read_aggregate


def quiet(*_args, **_kwargs):
    pass


def _record(number: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}"
    record_acceptance(line)
    print(line)
    assert ok, line


def test_acceptance_01_inner_solver_matches_oracle():
    outer = np.random.default_rng(20260822)
    worst_gap = -np.inf
    worst_excess = -np.inf
    started = time.perf_counter()
    for i in range(1000):
        m = int(outer.integers(2, 7))
        rho = float(outer.uniform(0.01, 2.0))
        kind = DivergenceKind.KL if i % 2 == 0 else DivergenceKind.CHI2
        z = outer.normal(0.0, float(outer.uniform(0.2, 3.0)), size=m)
        sol = solve_inner(z, rho, kind)
        ref = oracle_inner(z, rho, kind, budget=4000, rng=np.random.default_rng(i))
        worst_gap = max(worst_gap, ref.objective - sol.objective)
        worst_excess = max(worst_excess, phi_divergence(sol.pmf, kind) - rho)
    elapsed = time.perf_counter() - started
    _record(
        1,
        worst_gap <= 1e-5 and worst_excess <= 1e-8 and elapsed <= 60.0,
        f"1000 instances, M in 2..6, rho in [0.01, 2], both divergences: "
        f"worst oracle shortfall {worst_gap:.2e} (tol 1e-5), worst budget "
        f"excess {worst_excess:.2e} (tol 1e-8), {elapsed:.1f} s (limit 60 s)",
    )


def test_acceptance_02_two_point_closed_forms():
    z = np.array([0.0, 1.0])

    # chi-squared, rho = 1/2: the constraint (2 p_1 - 1)^2 <= 1/2 caps the
    # top weight at (2 + sqrt(2)) / 4, which is also the objective
    chi = solve_inner(z, 0.5, DivergenceKind.CHI2)
    chi_target = (2.0 + np.sqrt(2.0)) / 4.0
    chi_err = abs(chi.objective - chi_target)

    # KL: the point mass on the larger value has divergence exactly ln 2,
    # so it is feasible iff the budget reaches ln 2
    eps = 1e-9
    above = solve_inner(z, np.log(2.0) + eps, DivergenceKind.KL)
    below = solve_inner(z, np.log(2.0) - eps, DivergenceKind.KL)
    point_mass_above = above.objective == 1.0 and np.array_equal(above.pmf, [0.0, 1.0])
    strict_below = below.objective < 1.0

    _record(
        2,
        chi_err <= 1e-6 and point_mass_above and strict_below,
        f"chi2 z=(0,1) rho=0.5 objective {chi.objective:.7f} vs closed form "
        f"{chi_target:.7f} (err {chi_err:.1e}, tol 1e-6); KL point mass "
        f"feasible at ln2+1e-9 ({point_mass_above}) and infeasible at "
        f"ln2-1e-9 (objective short of 1 by {1.0 - below.objective:.1e})",
    )


def test_acceptance_03_chi2_solve_cost_scaling():
    sizes = [2**k for k in range(12, 19)]
    medians = []
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for m in sizes:
            rng = np.random.default_rng(m)
            solve_inner(rng.normal(size=m), 0.5, DivergenceKind.CHI2)  # warm up
            times = []
            for _ in range(7):
                z = rng.normal(size=m)
                t0 = time.perf_counter()
                solve_inner(z, 0.5, DivergenceKind.CHI2)
                times.append(time.perf_counter() - t0)
            medians.append(float(np.median(times)))
    finally:
        if gc_was_enabled:
            gc.enable()
    ratios = [b / a for a, b in zip(medians, medians[1:])]
    _record(
        3,
        max(ratios) <= 2.6,
        f"chi2 median solve time at M = 2^12 .. 2^18: per-doubling growth "
        f"ratios {', '.join(f'{r:.2f}' for r in ratios)} (each <= 2.6); "
        f"largest M took {medians[-1] * 1e3:.1f} ms",
    )


def test_acceptance_04_without_replacement_moment_identities():
    values = np.random.default_rng(42).normal(size=1000)
    n = values.size
    n_draws = 100_000
    s_sq = float(np.var(values, ddof=1))
    started = time.perf_counter()
    worst_var = -np.inf
    worst_mean = -np.inf
    for m in (10, 100, 500):
        rng = np.random.default_rng([4, m])
        means = np.empty(n_draws)
        varis = np.empty(n_draws)
        for j in range(n_draws):
            picked = values[sample_indices(n, m, SampleMode.WITHOUT_REPLACEMENT, rng).indices]
            means[j] = picked.mean()
            varis[j] = picked.var(ddof=1)
        var_target = (1.0 / m - 1.0 / n) * s_sq
        worst_var = max(worst_var, abs(float(np.var(means)) / var_target - 1.0))
        worst_mean = max(worst_mean, abs(float(np.mean(varis)) / s_sq - 1.0))
    elapsed = time.perf_counter() - started
    _record(
        4,
        worst_var <= 0.05 and worst_mean <= 0.02 and elapsed <= 30.0,
        f"1e5 draws at M in (10, 100, 500) from 1000 fixed values: "
        f"Var(sample mean) off by at most {worst_var:.2%} (tol 5%), mean "
        f"within-draw variance off by at most {worst_mean:.2%} (tol 2%), "
        f"{elapsed:.1f} s (limit 30 s)",
    )


def test_acceptance_05_bias_rate_and_replacement_ordering(tmp_path):
    grid = [64, 96, 128, 256, 448]
    config = parse_config(
        {
            "seeds": [0],
            "out_dir": str(tmp_path),
            "dataset": {"kind": "synthetic", "n": 512, "d": 5, "separation": 1.0, "seed": 0},
            "divergence": {"kind": "chi2", "rho": 0.1},
        }
    )
    started = time.perf_counter()
    assert cmd_bias(config, grid, resamples=40_000, log=quiet) == 0
    elapsed = time.perf_counter() - started

    summary = json.loads((tmp_path / "bias_summary.json").read_text())
    slope = summary["without"]["slope"]
    bias = {"without": {}, "with": {}}
    with open(tmp_path / "bias.csv", newline="") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            bias[row["mode"]][int(row["M"])] = float(row["est_sq_bias"])
    ratios = {m: bias["with"][m] / bias["without"][m] for m in grid}
    ordered = all(bias["with"][m] >= bias["without"][m] for m in grid)
    _record(
        5,
        0.6 <= slope <= 1.4 and ordered and elapsed <= 300.0,
        f"squared-bias slope vs eta^2 (without replacement) {slope:.3f} "
        f"(band [0.6, 1.4]); with/without ratio at each M "
        f"{', '.join(f'{ratios[m]:.2f}' for m in grid)} (each >= 1); "
        f"{elapsed:.0f} s (limit 300 s)",
    )


def test_acceptance_06_geometric_schedule_efficiency(tmp_path):
    raw = {
        "seeds": list(range(12)),
        "out_dir": str(tmp_path),
        "dataset": {"kind": "synthetic", "n": 4096, "d": 5, "separation": 1.0, "scale": 0.1, "seed": 0},
        "model": {"kind": "ridge", "mu": 1.0},
        "divergence": {"kind": "kl", "rho": 0.1},
        "schedule": {"kind": "geometric", "start_size": 16, "ratio": 0.5},
        "optimizer": {"work_budget": 122880.0},
    }
    probe = parse_config(raw)
    train, _ = materialize_dataset(probe)
    model = build_model(probe, train)
    raw["optimizer"]["gamma"] = step_size_bound(model, train)
    config = parse_config(raw)

    started = time.perf_counter()
    assert cmd_schedules(config, "geometric:0.5,polynomial:1.0", log=quiet) == 0
    elapsed = time.perf_counter() - started
    summary = json.loads((tmp_path / "schedules_summary.json").read_text())
    geo = summary["geometric_0.5"]["final_gap_mean"]
    poly = summary["polynomial_1"]["final_gap_mean"]

    # ledger arithmetic on the uncapped doubling sequence: cumulative work
    # stays within 1/(1 - nu) + 0.1 = 2.1 of the last iteration's cost
    worst_ledger = -np.inf
    for kind in (DivergenceKind.KL, DivergenceKind.CHI2):
        sched = GrowthSchedule(
            kind=ScheduleKind.GEOMETRIC, start_size=16, full_size=2**62, ratio=0.5
        )
        m, total = 16, 0.0
        for t in range(40):
            w = work_units(m, kind)
            total += w
            if t >= 5:
                worst_ledger = max(worst_ledger, total / w)
            m = schedule_next(sched, t, m)

    _record(
        6,
        geo <= poly and worst_ledger <= 2.1 and elapsed <= 600.0,
        f"mean final optimality gap at W=122880 over 12 seeds: geometric "
        f"{geo:.2e} <= polynomial {poly:.2e}; cumulative-to-current work "
        f"ratio peaks at {worst_ledger:.3f} for t >= 5 (bound 2.1); "
        f"{elapsed:.0f} s (limit 600 s)",
    )


def test_acceptance_07_degenerate_reductions():
    train = make_synthetic(256, 4, separation=1.0, seed=3)
    model = LossModel(LossKind.LOGISTIC, 4)
    n = train.n

    # with a zero budget and no widening the inner solver returns the
    # uniform pmf, so the robust descent must replay plain mini-batch SGD
    checked_rows = 0
    bitwise = True
    for kind in (DivergenceKind.CHI2, DivergenceKind.KL):
        sched = GrowthSchedule(
            kind=ScheduleKind.GEOMETRIC, start_size=16, full_size=n, ratio=0.5
        )
        cfg = SgdConfig(
            gamma=0.3,
            schedule=sched,
            budget=BudgetRule(rho=0.0, c_infl=0.0),
            kind=kind,
            seed=7,
            max_full_iters=10,
        )
        trace = run_dssd(cfg, train, model)
        assert trace.error is None

        theta = initial_theta(cfg, model.dim)
        thetas = []
        t, m = 0, sched.start_size
        while m < n:
            rng = np.random.default_rng([cfg.seed, t + 1])
            draw = sample_indices(n, m, SampleMode.WITHOUT_REPLACEMENT, rng)
            thetas.append(theta)
            grad = robust_subgradient(model, theta, train, draw.indices, uniform_pmf(m))
            theta = theta - cfg.gamma * grad
            m = schedule_next(sched, t, m)
            t += 1
        full_idx = np.arange(n)
        for _ in range(cfg.max_full_iters):
            thetas.append(theta)
            grad = robust_subgradient(model, theta, train, full_idx, uniform_pmf(n))
            theta = theta - cfg.gamma * grad

        np.testing.assert_array_equal(trace.theta, theta)
        spec0 = DivergenceSpec(kind, 0.0)
        for row, th in zip(trace.rows, thetas, strict=True):
            robust, erm, _ = evaluate_state(th, train, model, spec0)
            bitwise = bitwise and row.robust_train == robust and row.erm_train == erm
            checked_rows += 1

    # a huge budget frees the worst case to sit on the single worst sample
    rng = np.random.default_rng(11)
    max_checks = 0
    for _ in range(3):
        theta = rng.uniform(-1.0, 1.0, model.dim)
        z = batch_objective_vector(model, theta, train, np.arange(n))
        for kind in (DivergenceKind.KL, DivergenceKind.CHI2):
            spec = DivergenceSpec(kind, 1e6)
            assert robust_objective(theta, train, model, spec) == float(np.max(z))
            max_checks += 1

    _record(
        7,
        bitwise and checked_rows == 28 and max_checks == 6,
        f"zero-budget robust descent bitwise-equals mini-batch SGD over "
        f"{checked_rows} trace rows (both divergences, shared index streams); "
        f"rho=1e6 robust objective equals the max sample loss exactly on "
        f"{max_checks} checks",
    )


def test_acceptance_08_gradients_match_finite_differences():
    data = make_synthetic(64, 6, separation=1.0, seed=5)
    models = (LossModel(LossKind.LOGISTIC, 6), LossModel(LossKind.RIDGE_LOGISTIC, 6, mu=0.7))
    rng = np.random.default_rng(88)

    def rel_err(grad, fd):
        scale = max(float(np.max(np.abs(fd))), 1e-8)
        return float(np.max(np.abs(grad - fd))) / scale

    worst_loss = -np.inf
    for k in range(100):
        model = models[k % 2]
        theta = rng.uniform(-1.0, 1.0, 6)
        i = int(rng.integers(data.n))
        x, y = data.x[i], data.y[i]
        grad = loss_gradient(model, theta, x, y)
        fd = central_difference_gradient(lambda th: loss_value(model, th, x, y), theta)
        worst_loss = max(worst_loss, rel_err(grad, fd))

    worst_robust = -np.inf
    for k in range(100):
        model = models[k % 2]
        theta = rng.uniform(-1.0, 1.0, 6)
        idx = rng.choice(data.n, size=16, replace=False)
        pmf = rng.dirichlet(np.ones(16))
        grad = robust_subgradient(model, theta, data, idx, pmf)
        fd = central_difference_gradient(
            lambda th: float(np.dot(pmf, batch_objective_vector(model, th, data, idx))),
            theta,
        )
        worst_robust = max(worst_robust, rel_err(grad, fd))

    worst_dual = -np.inf
    for k in range(100):
        model = models[k % 2]
        kind = DivergenceKind.KL if k % 4 < 2 else DivergenceKind.CHI2
        rho = float(rng.uniform(0.05, 1.0))
        i = int(rng.integers(data.n))
        x, y = data.x[i], data.y[i]
        point = np.concatenate(
            [rng.uniform(-1.0, 1.0, 6), [rng.uniform(0.8, 1.6)], [rng.uniform(-0.5, 0.5)]]
        )

        def dual_summand(v):
            s = (loss_value(model, v[:6], x, y) - v[7]) / v[6]
            return v[6] * rho + v[7] + v[6] * float(phi_conjugate(kind, s))

        g_theta, g_alpha, g_lam, clamped = dual_sample_gradients(
            model, point[:6], x, y, point[6], point[7], rho, kind
        )
        assert not clamped
        grad = np.concatenate([g_theta, [g_alpha], [g_lam]])
        fd = central_difference_gradient(dual_summand, point)
        worst_dual = max(worst_dual, rel_err(grad, fd))

    _record(
        8,
        max(worst_loss, worst_robust, worst_dual) <= 1e-4,
        f"max relative error vs central differences over 100 points each: "
        f"loss gradient {worst_loss:.1e}, fixed-pmf robust subgradient "
        f"{worst_robust:.1e}, dual summand gradient {worst_dual:.1e} "
        f"(tol 1e-4)",
    )


def test_acceptance_09_subsampling_reaches_target_with_less_work(tmp_path):
    oct_path = tmp_path / "octamer.txt"
    census_path = tmp_path / "census.txt"
    write_octamer_corpus(oct_path)
    write_census_corpus(census_path)
    runs = (
        ("octamer", "octamer", oct_path, 0.1),
        ("census", "table", census_path, 0.02),
    )

    details = []
    ok = True
    for name, dataset_kind, path, gamma in runs:
        config = parse_config(
            {
                "seeds": list(range(20)),
                "out_dir": str(tmp_path / name),
                "methods": ["dssd", "full"],
                "dataset": {
                    "kind": dataset_kind,
                    "path": str(path),
                    "test_fraction": 0.25,
                    "seed": 0,
                },
                "divergence": {"kind": "chi2", "rho": 0.1},
                "schedule": {"kind": "geometric", "start_size": 8, "ratio": 0.7},
                "optimizer": {"gamma": gamma, "max_full_iters": 400},
            }
        )
        assert cmd_run(config, log=quiet) == 0
        rows = read_aggregate(tmp_path / name / "aggregate.csv")
        full = [r for r in rows if r["method"] == "full"]
        dssd = [r for r in rows if r["method"] == "dssd"]
        target = full[-1]["robust_train"]
        crossing = next((r for r in dssd if r["robust_train"] <= target), None)
        test_gap = abs(dssd[-1]["test_err"] - full[-1]["test_err"])
        ok = ok and crossing is not None and crossing["W"] < full[-1]["W"] and test_gap <= 0.01
        ratio = np.nan if crossing is None else crossing["W"] / full[-1]["W"]
        details.append(f"{name}: crossing at W ratio {ratio:.3f}, test gap {test_gap:.4f}")
    _record(
        9,
        ok,
        f"20-seed mean curves, chi2 rho=0.1: {'; '.join(details)} "
        f"(bounds: ratio < 1, test gap <= 0.01)",
    )


def test_acceptance_10_property_suite_coverage():
    here = Path(__file__).parent
    modules = (
        "config",
        "data",
        "divergence",
        "harness",
        "inner",
        "losses",
        "optimizer",
        "sampling",
        "traces",
    )
    counts = {}
    for mod in modules:
        text = (here / f"test_{mod}.py").read_text()
        counts[mod] = len(re.findall(r"\n\s*def test_", text))
    _record(
        10,
        all(count >= 3 for count in counts.values()),
        f"per-module property suites present with "
        f"{sum(counts.values())} tests across {len(modules)} modules "
        f"(min {min(counts.values())} per module)",
    )
