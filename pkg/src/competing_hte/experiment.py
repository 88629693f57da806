"""Replicated setting sweeps over training strategies and effect kinds.

For every sweep value and replication the runner samples a training set,
fits the shared pieces (competing cells, propensity model) once, fits one
main-hazard grid per (strategy, effect) and records

* ``rmse_tau`` at the horizon for each effect,
* ``rmse_haz`` at every ``(k, a)`` under the effect's per-arm intervention,
* ``abs_ess`` and ``rel_ess`` of the weighted strategies at every ``(k, a)``.

Failures inside one (strategy, effect) fit are written into the ``status``
column of the affected rows; the sweep carries on.
"""
from __future__ import annotations

import csv
import json
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .classify import ClassifierSpec, Constant, Logistic
from .data import Dataset
from .dgp import preset, sample_covariates, sample_interventional, sample_observational
from .errors import CompetingHTEError, ConfigError, InsufficientReplications
from .hazards import (
    EstimatedWeights,
    HazardGrid,
    TrainingStrategy,
    TrueWeights,
    fit_competing_cells,
    fit_hazard_grid,
    fit_main_cells,
    fit_propensity,
)
from .interventions import parse_effect
from .metrics import rmse_haz, rmse_tau, summarize
from .seeding import Role, observational_seeds, seed_for

_FAILURES = (CompetingHTEError, ValueError, FloatingPointError, np.linalg.LinAlgError)

STRATEGIES = tuple(s.value for s in TrainingStrategy)
DEFAULT_EFFECTS = ("total", "direct", "separable_direct")

REP_COLUMNS = ("setting", "param", "rep", "strategy", "effect", "metric", "k", "arm", "value", "base_seed", "status")
SUMMARY_COLUMNS = ("setting", "param", "strategy", "effect", "metric", "k", "arm", "mean", "se", "n_reps", "base_seed", "status")


@dataclass(frozen=True)
class ExperimentConfig:
    setting: int = 1
    sweep_values: tuple = (0.0,)
    strategies: tuple = STRATEGIES
    effects: tuple = DEFAULT_EFFECTS
    main_spec: ClassifierSpec = field(default_factory=Constant)
    competing_spec: ClassifierSpec = field(default_factory=lambda: Logistic(100.0))
    propensity_spec: ClassifierSpec = field(default_factory=lambda: Logistic(100.0))
    n_train: int = 5000
    n_test: int = 10_000
    n_reps: int = 10
    base_seed: int = 0
    horizon: int = 30
    hazard_metrics: bool = True
    ess_metrics: bool = True

    def __post_init__(self):
        if self.setting == "semi_synth":
            raise ConfigError("semi-synthetic experiments run through the semi-synth command")
        if self.setting not in (1, 2, 3, 4):
            raise ConfigError(f"setting must be 1..4, got {self.setting!r}")
        if not self.sweep_values:
            raise ConfigError("sweep_values must be nonempty")
        if self.n_reps < 2:
            raise ConfigError("n_reps must be >= 2 to report standard errors")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be >= 0")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}")
        for e in self.effects:
            parse_effect(e).arms()
        # fail early on out-of-range hazards for any sweep value
        for v in self.sweep_values:
            self.dgp(v)

    def dgp(self, value):
        return preset(self.setting, value, n_train=self.n_train, n_test=self.n_test, horizon=self.horizon)

    def to_dict(self):
        d = asdict(self)
        for key in ("sweep_values", "strategies", "effects"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("main_spec", "competing_spec", "propensity_spec"):
            if isinstance(d.get(key), dict):
                d[key] = ClassifierSpec.from_dict(d[key])
        for key in ("sweep_values", "strategies", "effects"):
            if key in d:
                d[key] = tuple(d[key])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None


def counterfactual_sample(dgp, interventions, seed, n=None) -> Dataset:
    """``n`` units per arm drawn under ``interventions[a]``, concatenated.

    The arms get independent child streams of ``seed``; sharing one stream
    would make both arm samples identical whenever the arms' hazards agree.
    """
    seeds = [int(np.random.SeedSequence([seed, a]).generate_state(1, np.uint64)[0]) for a in (0, 1)]
    return Dataset.concat([sample_interventional(dgp, interventions[a], seeds[a], n) for a in (0, 1)])


def _row(setting, value, rep, strategy, effect, metric, k, arm, v, seed, status="ok"):
    return (setting, float(value), rep, strategy, effect, metric, k, arm, float(v), seed, status)


def run_replication(cfg: ExperimentConfig, value, rep: int):
    """Per-replication rows in :data:`REP_COLUMNS` order."""
    dgp = cfg.dgp(value)
    K = cfg.horizon
    train = sample_observational(dgp, observational_seeds(cfg.base_seed, rep))
    test_x = sample_covariates(cfg.n_test, dgp.rho, seed_for(cfg.base_seed, rep, Role.TEST))
    cf_seed = seed_for(cfg.base_seed, rep, Role.COUNTERFACTUAL)
    strategies = [TrainingStrategy(s) for s in cfg.strategies]
    rows = []
    row = lambda *r: rows.append(_row(cfg.setting, value, rep, *r, cfg.base_seed))  # noqa: E731

    competing = fit_competing_cells(train, cfg.competing_spec)
    shared = {}

    def observational_cells():
        if "obs" not in shared:
            shared["obs"] = fit_main_cells(train, cfg.main_spec)
        return shared["obs"]

    def pi_hat():
        if "pi" not in shared:
            shared["pi"] = fit_propensity(train, cfg.propensity_spec)
        return shared["pi"]

    for name in cfg.effects:
        kind = parse_effect(name)
        arms = kind.arms()
        for strategy in strategies:
            try:
                if strategy == TrainingStrategy.OBSERVATIONAL:
                    cells, diags = observational_cells()
                    grid = HazardGrid(cells, competing[0], K, tuple(competing[1]) + tuple(diags))
                elif strategy == TrainingStrategy.WEIGHTED_TRUE:
                    grid = fit_hazard_grid(train, cfg.main_spec, strategy, TrueWeights(dgp, arms), competing=competing)
                elif strategy == TrainingStrategy.WEIGHTED_ESTIMATED:
                    w = EstimatedWeights(pi_hat(), HazardGrid({}, competing[0], K), arms)
                    grid = fit_hazard_grid(train, cfg.main_spec, strategy, w, competing=competing)
                else:
                    cf = counterfactual_sample(dgp, arms, cf_seed, cfg.n_train)
                    grid = fit_hazard_grid(cf, cfg.main_spec, strategy, competing_spec=cfg.competing_spec)
                row(strategy.value, name, "rmse_tau", K, -1, rmse_tau(grid, dgp, kind, test_x, K))
                if cfg.hazard_metrics:
                    for a in (0, 1):
                        for k in range(1, K + 1):
                            try:
                                v, st = rmse_haz(grid, dgp, arms[a], a, k), "ok"
                            except _FAILURES as exc:
                                v, st = float("nan"), f"error: {type(exc).__name__}: {exc}"
                            row(strategy.value, name, "rmse_haz", k, a, v, st)
                weighted = strategy in (TrainingStrategy.WEIGHTED_TRUE, TrainingStrategy.WEIGHTED_ESTIMATED)
                if cfg.ess_metrics and weighted:
                    for d in grid.diagnostics:
                        if d.event == "Y" and d.n_at_risk:
                            row(strategy.value, name, "abs_ess", d.k, d.a, d.ess)
                            row(strategy.value, name, "rel_ess", d.k, d.a, d.ess / d.n_at_risk)
            except _FAILURES as exc:
                row(strategy.value, name, "rmse_tau", K, -1, float("nan"), f"error: {type(exc).__name__}: {exc}")
    return rows


def _task(args):
    cfg, value, rep = args
    return run_replication(cfg, value, rep)


def run_replications(cfg: ExperimentConfig, workers: int = 1):
    """All per-replication rows, deterministically sorted."""
    tasks = [(cfg, v, r) for v in cfg.sweep_values for r in range(cfg.n_reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=_sort_key)


def _sort_key(r):
    setting, param, rep, strategy, effect, metric, k, arm = r[:8]
    return (str(setting), param, metric, effect, strategy, k, arm, rep)


def summarize_rows(rows):
    """Aggregate per-replication rows into :data:`SUMMARY_COLUMNS` rows."""
    groups = defaultdict(list)
    for r in rows:
        setting, param, rep, strategy, effect, metric, k, arm, value, seed, status = r
        groups[(setting, param, strategy, effect, metric, k, arm, seed)].append((value, status))
    out = []
    for key in sorted(groups, key=lambda g: (str(g[0]), g[1], g[4], g[3], g[2], g[5], g[6])):
        setting, param, strategy, effect, metric, k, arm, seed = key
        vals = [v for v, st in groups[key] if st == "ok"]
        errors = sorted({st for _, st in groups[key] if st != "ok"})
        try:
            s = summarize(vals)
            mean, se, status = s.mean, s.std_error, "ok"
        except InsufficientReplications:
            mean = vals[0] if vals else float("nan")
            se, status = float("nan"), "insufficient replications"
        if errors:
            status = f"{len(groups[key]) - len(vals)} failed: {errors[0]}"
        out.append((setting, param, strategy, effect, metric, k, arm, mean, se, len(vals), seed, status))
    return out


def run(cfg: ExperimentConfig, workers: int = 1):
    """Run the sweep; returns ``(replication_rows, summary_rows)``."""
    rows = run_replications(cfg, workers)
    return rows, summarize_rows(rows)


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def write_outputs(cfg: ExperimentConfig, rows, summary, out_dir):
    """One summary CSV per metric, a per-replication CSV, and the config used.

    Returns the list of written paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    prefix = f"setting{cfg.setting}"
    paths = []
    by_metric = defaultdict(list)
    for r in summary:
        by_metric[r[4]].append(r)
    for metric in sorted(by_metric):
        path = os.path.join(out_dir, f"{prefix}_{metric}.csv")
        _write(path, SUMMARY_COLUMNS, by_metric[metric])
        paths.append(path)
    path = os.path.join(out_dir, f"{prefix}_replications.csv")
    _write(path, REP_COLUMNS, rows)
    paths.append(path)
    path = os.path.join(out_dir, f"{prefix}_config.json")
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
    paths.append(path)
    return paths


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for r in rows:
            out.writerow([_fmt(v) for v in r])


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
