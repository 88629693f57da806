"""Semi-synthetic benchmark from paired potential outcomes.

Each pair supplies the main-event time under both arms (e.g. twins, where
each twin acts as the other's counterfactual). Treatment selection and a
competing event are simulated on top, so every interventional ground truth
is available:

* selection: ``A ~ Bernoulli(expit(xi_a * z))``
* competing hazard: ``expit(log(0.1) + xi_d * (1 - a) * z)`` at step 1 and
  ``0.1 / (k - 1)`` afterwards

where ``z`` is the training-set standardized mean of the covariates in
``feature_subset``. Source data indexed by day ``0..10`` are shifted to
timesteps ``1..11``.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from . import effects
from .classify import ClassifierSpec, Constant, Logistic
from .data import Dataset, EventType
from .errors import ConfigError, ConstantFeatureError, DataError
from .hazards import (
    EstimatedWeights,
    HazardGrid,
    TrainingStrategy,
    TrueWeights,
    fit_competing_cells,
    fit_hazard_grid,
    fit_propensity,
)
from .interventions import parse_effect
from .metrics import summarize
from .seeding import Role, seed_for


class PairedRecord(NamedTuple):
    pair_id: str
    x: np.ndarray
    t_main: tuple  # (T^Y(0), T^Y(1)) in timesteps, K + 1 if event-free


@dataclass(frozen=True, eq=False)
class Pairs:
    """Paired outcomes stored as arrays; ``t_comp`` is filled by simulation."""

    pair_id: np.ndarray
    x: np.ndarray
    t_main: np.ndarray  # (m, 2)
    horizon: int
    t_comp: np.ndarray | None = None  # (m, 2) simulated competing times

    def __post_init__(self):
        if self.t_main.shape != (len(self.x), 2):
            raise DataError("t_main must be an (m, 2) array aligned with x")

    def __len__(self):
        return len(self.x)

    def subset(self, idx):
        return Pairs(
            self.pair_id[idx],
            self.x[idx],
            self.t_main[idx],
            self.horizon,
            None if self.t_comp is None else self.t_comp[idx],
        )

    def records(self):
        for i in range(len(self)):
            yield PairedRecord(str(self.pair_id[i]), self.x[i], (int(self.t_main[i, 0]), int(self.t_main[i, 1])))


@dataclass(frozen=True)
class SemiSynthConfig:
    xi_a: float = 0.0
    xi_d: float = 0.0
    feature_subset: tuple = (0,)
    horizon: int = 11
    seed: int = 0
    n_reps: int = 5
    competing: bool = True
    strategies: tuple = tuple(s.value for s in TrainingStrategy)
    effects: tuple = ("total", "direct", "separable_direct")
    main_spec: ClassifierSpec = field(default_factory=Constant)
    competing_spec: ClassifierSpec = field(default_factory=lambda: Logistic(100.0))
    propensity_spec: ClassifierSpec = field(default_factory=lambda: Logistic(100.0))

    def __post_init__(self):
        if not self.feature_subset:
            raise ConfigError("feature_subset must be nonempty")
        if self.horizon < 2:
            raise ConfigError("the competing hazard needs horizon >= 2")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("main_spec", "competing_spec", "propensity_spec"):
            if isinstance(d.get(key), dict):
                d[key] = ClassifierSpec.from_dict(d[key])
        for key in ("feature_subset", "strategies", "effects"):
            if key in d:
                d[key] = tuple(d[key])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


# -- standardization ----------------------------------------------------------------


@dataclass(frozen=True)
class Standardizer:
    mean: float
    std: float

    def __call__(self, values):
        return (np.asarray(values, dtype=float) - self.mean) / self.std


def standardize_train(values):
    """Standardize with the (n-divisor) mean and std of ``values``; returns ``(z, transform)``."""
    v = np.asarray(values, dtype=float)
    std = float(v.std())
    if not std > 0:
        raise ConstantFeatureError("cannot standardize a constant feature")
    t = Standardizer(float(v.mean()), std)
    return t(v), t


def subset_score(x, feature_subset):
    x = np.atleast_2d(x)
    idx = list(feature_subset)
    if max(idx) >= x.shape[1] or min(idx) < 0:
        raise ConfigError(f"feature_subset {idx} out of range for {x.shape[1]} covariates")
    return x[:, idx].mean(axis=1)


# -- simulated mechanisms --------------------------------------------------------------


def competing_hazard(k, z, a, xi_d):
    """Simulated competing hazard at 1-based step ``k``."""
    z = np.asarray(z, dtype=float)
    if k == 1:
        return expit(np.log(0.1) + xi_d * (1 - a) * z)
    return np.full(z.shape, 0.1 / (k - 1))


def competing_hazard_matrix(z, a, xi_d, K):
    return np.column_stack([competing_hazard(k, z, a, xi_d) for k in range(1, K + 1)])


class SemiSynthTruth:
    """True propensity and competing hazards, in the interface :class:`TrueWeights` expects."""

    def __init__(self, transform, feature_subset, xi_a, xi_d, horizon, competing=True):
        self.transform = transform
        self.feature_subset = tuple(feature_subset)
        self.xi_a = xi_a
        self.xi_d = xi_d
        self.horizon = horizon
        self.competing = competing

    def z(self, x):
        return self.transform(subset_score(x, self.feature_subset))

    def propensity(self, x):
        return expit(self.xi_a * self.z(x))

    def hazard_matrix(self, event, x, a):
        if event != EventType.COMPETING:
            raise ValueError("the main-event hazard of the paired data is not known")
        z = self.z(x)
        if not self.competing:
            return np.zeros((len(z), self.horizon))
        a = np.broadcast_to(np.asarray(a), z.shape)
        return np.column_stack([competing_hazard(k, z, a, self.xi_d) for k in range(1, self.horizon + 1)])


def simulate_competing_times(z, xi_d, K, rng, competing=True):
    """Latent competing times ``(m, 2)`` for both arms, sharing one uniform per unit and step."""
    z = np.asarray(z, dtype=float)
    u = rng.random((len(z), K))
    out = np.full((len(z), 2), K + 1, dtype=np.int64)
    if not competing:
        return out
    for a in (0, 1):
        hit = u < competing_hazard_matrix(z, a, xi_d, K)
        any_hit = hit.any(axis=1)
        out[any_hit, a] = hit[any_hit].argmax(axis=1) + 1
    return out


def combine(t_main, t_comp, K):
    """First event from main and competing times; ties go to the competing event."""
    t_main = np.asarray(t_main)
    t_comp = np.asarray(t_comp)
    comp_first = t_comp <= t_main
    t = np.where(comp_first, t_comp, t_main)
    e = np.where(t > K, EventType.NONE, np.where(comp_first, EventType.COMPETING, EventType.MAIN))
    return np.minimum(t, K + 1), e.astype(np.int64)


def simulate_competing(ds: Dataset, z, xi_d: float, seed) -> Dataset:
    """Add simulated competing events to a dataset of true main-event times.

    A competing event at ``k`` truncates the record to ``(k, COMPETING)``.
    """
    t_comp = simulate_competing_times(z, xi_d, ds.horizon, np.random.default_rng(seed))
    tc = t_comp[np.arange(ds.n), ds.a]
    t_main = np.where(ds.e == EventType.MAIN, ds.t, ds.horizon + 1)
    t, e = combine(t_main, tc, ds.horizon)
    return Dataset(ds.x, ds.a, t, e, ds.horizon)


def assign_observed(pairs: Pairs, transform, cfg: SemiSynthConfig, rng):
    """Select one arm per pair with ``P(A=1) = expit(xi_a * z)`` and return ``(Dataset, A)``."""
    if pairs.t_comp is None:
        raise ValueError("simulate competing times before assigning treatment")
    z = transform(subset_score(pairs.x, cfg.feature_subset))
    a = (rng.random(len(pairs)) < expit(cfg.xi_a * z)).astype(np.int64)
    rows = np.arange(len(pairs))
    t, e = combine(pairs.t_main[rows, a], pairs.t_comp[rows, a], pairs.horizon)
    return Dataset(pairs.x, a, t, e, pairs.horizon), a


def interventional_dataset(pairs: Pairs, spec) -> Dataset:
    """Every pair observed under ``spec``; records carry ``A = spec.arm``."""
    a_main, a_comp, keep = spec.resolve()
    m = len(pairs)
    t_comp = pairs.t_comp[:, a_comp] if keep else np.full(m, pairs.horizon + 1)
    t, e = combine(pairs.t_main[:, a_main], t_comp, pairs.horizon)
    return Dataset(pairs.x, np.full(m, a_main), t, e, pairs.horizon)


# -- evaluation ----------------------------------------------------------------------


def ground_truth_rmst(t_main, t_comp, spec, K):
    """Realized ``min(T, K)`` under ``spec`` from both arms' main and competing times."""
    t_main = np.atleast_2d(t_main)
    t_comp = np.atleast_2d(t_comp)
    a_main, a_comp, keep = spec.resolve()
    t = t_main[:, a_main]
    if keep:
        t = np.minimum(t, t_comp[:, a_comp])
    return np.minimum(t, K)


def rmse_rmst(grid, test_pairs: Pairs, spec, a: int, K: int | None = None) -> float:
    K = test_pairs.horizon if K is None else K
    if spec.arm != a:
        raise ValueError(f"{spec.label} is evaluated on arm {spec.arm}, not {a}")
    truth = ground_truth_rmst(test_pairs.t_main, test_pairs.t_comp, spec, K)
    pred = effects.rmst(grid, test_pairs.x, spec, K)
    return float(np.sqrt(np.mean((truth - pred) ** 2)))


def split_pairs(n_pairs, seed, train_frac=0.5):
    perm = np.random.default_rng(seed).permutation(n_pairs)
    cut = int(round(train_frac * n_pairs))
    return np.sort(perm[:cut]), np.sort(perm[cut:])


def run_replication(pairs: Pairs, cfg: SemiSynthConfig, rep: int):
    """One replication; returns rows ``(strategy, spec_label, arm, rmse, status)``."""
    K = pairs.horizon
    train_idx, test_idx = split_pairs(len(pairs), seed_for(cfg.seed, rep, Role.SPLIT))
    _, transform = standardize_train(subset_score(pairs.x[train_idx], cfg.feature_subset))
    z_all = transform(subset_score(pairs.x, cfg.feature_subset))
    rng = np.random.default_rng(seed_for(cfg.seed, rep, Role.EVENTS))
    pairs = replace(pairs, t_comp=simulate_competing_times(z_all, cfg.xi_d, K, rng, cfg.competing))
    train, test = pairs.subset(train_idx), pairs.subset(test_idx)
    ds, _ = assign_observed(train, transform, cfg, np.random.default_rng(seed_for(cfg.seed, rep, Role.TREATMENT)))
    truth = SemiSynthTruth(transform, cfg.feature_subset, cfg.xi_a, cfg.xi_d, K, cfg.competing)

    strategies = [TrainingStrategy(s) for s in cfg.strategies]
    competing = fit_competing_cells(ds, cfg.competing_spec)
    hd_grid = HazardGrid({}, competing[0], K)
    pi_hat = None
    rows = []
    for name in cfg.effects:
        arms = parse_effect(name).arms()
        for strategy in strategies:
            try:
                if strategy == TrainingStrategy.COUNTERFACTUAL:
                    cf = Dataset.concat([interventional_dataset(train, arms[a]) for a in (0, 1)])
                    grid = fit_hazard_grid(cf, cfg.main_spec, strategy, competing_spec=cfg.competing_spec)
                elif strategy == TrainingStrategy.WEIGHTED_TRUE:
                    grid = fit_hazard_grid(ds, cfg.main_spec, strategy, TrueWeights(truth, arms), competing=competing)
                elif strategy == TrainingStrategy.WEIGHTED_ESTIMATED:
                    pi_hat = pi_hat or fit_propensity(ds, cfg.propensity_spec)
                    w = EstimatedWeights(pi_hat, hd_grid, arms)
                    grid = fit_hazard_grid(ds, cfg.main_spec, strategy, w, competing=competing)
                else:
                    grid = fit_hazard_grid(ds, cfg.main_spec, strategy, competing=competing)
                for a in (0, 1):
                    rows.append((strategy.value, arms[a].label, a, rmse_rmst(grid, test, arms[a], a, K), "ok"))
            except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
                for a in (0, 1):
                    rows.append((strategy.value, arms[a].label, a, float("nan"), f"error: {exc}"))
    return rows


def run(pairs: Pairs, cfg: SemiSynthConfig):
    """All replications, summarized; rows match :data:`SUMMARY_COLUMNS`."""
    per_key = defaultdict(list)
    status = defaultdict(set)
    for rep in range(cfg.n_reps):
        for strategy, label, arm, value, st in run_replication(pairs, cfg, rep):
            key = (strategy, label, arm)
            if st == "ok":
                per_key[key].append(value)
            else:
                status[key].add(st)
            per_key.setdefault(key, per_key[key])
    out = []
    for key in sorted(per_key):
        vals = per_key[key]
        if len(vals) >= 2:
            s = summarize(vals)
            mean, se = s.mean, s.std_error
        else:
            mean, se = (vals[0] if vals else float("nan")), float("nan")
        st = "ok" if not status[key] and len(vals) >= 2 else "; ".join(sorted(status[key])) or "insufficient replications"
        out.append((cfg.xi_a, cfg.xi_d, key[0], key[1], key[2], mean, se, len(vals), cfg.seed, st))
    return out


SUMMARY_COLUMNS = ("xi_a", "xi_d", "strategy", "spec", "arm", "rmse_rmst_mean", "rmse_rmst_se", "n_reps", "seed", "status")


def write_summary_csv(rows, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(SUMMARY_COLUMNS)
        for r in rows:
            out.writerow(r)


# -- ingestion -----------------------------------------------------------------------


def read_pairs_csv(path, horizon: int = 11, day_indexed: bool = True) -> Pairs:
    """Read ``pair_id,arm,x0..x{d-1},t,e`` rows (two per pair, ``e`` in ``Y``/``none``).

    With ``day_indexed`` the time column counts days from 0 and is shifted by
    one. Events after the horizon are treated as event-free. The pair's
    covariates are the mean of its two rows.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    d = len(header) - 4
    expected = ["pair_id", "arm"] + [f"x{j}" for j in range(d)] + ["t", "e"]
    if d < 1 or header != expected:
        raise DataError(f"{path}: header must be pair_id,arm,x0,...,x{{d-1}},t,e")
    by_pair = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header) or any(c.strip() == "" for c in row):
            raise DataError(f"{path}:{lineno}: expected {len(header)} non-empty fields")
        pid = row[0].strip()
        try:
            arm = int(row[1])
            x = [float(c) for c in row[2 : 2 + d]]
            t = int(row[2 + d])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
        e = row[3 + d].strip()
        if arm not in (0, 1):
            raise DataError(f"{path}:{lineno}: arm must be 0 or 1")
        if e not in ("Y", "none"):
            raise DataError(f"{path}:{lineno}: event must be Y or none (competing events are simulated)")
        step = t + 1 if day_indexed else t
        if step < 1:
            raise DataError(f"{path}:{lineno}: time {t} before the first step")
        if e == "none" or step > horizon:
            step = horizon + 1
        slot = by_pair.setdefault(pid, {})
        if arm in slot:
            raise DataError(f"{path}:{lineno}: duplicate arm {arm} for pair {pid}")
        slot[arm] = (x, step)
    ids, xs, ts = [], [], []
    for pid, slot in by_pair.items():
        if set(slot) != {0, 1}:
            raise DataError(f"{path}: pair {pid} lacks one of the two arms")
        ids.append(pid)
        xs.append(np.mean([slot[0][0], slot[1][0]], axis=0))
        ts.append((slot[0][1], slot[1][1]))
    return Pairs(np.array(ids), np.array(xs, dtype=float), np.array(ts, dtype=np.int64), horizon)


def write_pairs_csv(pairs: Pairs, path, day_indexed: bool = True):
    K = pairs.horizon
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["pair_id", "arm"] + [f"x{j}" for j in range(pairs.x.shape[1])] + ["t", "e"])
        for i in range(len(pairs)):
            for a in (0, 1):
                t = int(pairs.t_main[i, a])
                e = "none" if t > K else "Y"
                t_out = (min(t, K + 1) - 1) if day_indexed else t
                out.writerow([pairs.pair_id[i], a] + [repr(float(v)) for v in pairs.x[i]] + [t_out, e])


def make_toy_pairs(n_pairs: int, dim: int = 5, horizon: int = 11, seed=0) -> Pairs:
    """Random paired outcomes with covariate-dependent, decaying main hazards.

    Stand-in for real paired data in demos and tests.
    """
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n_pairs, dim))
    lin = -2.0 + 0.8 * x[:, 0] - 0.5 * x[:, min(1, dim - 1)]
    t = np.full((n_pairs, 2), horizon + 1, dtype=np.int64)
    u = rng.random((n_pairs, horizon))
    for a in (0, 1):
        for k in range(horizon, 0, -1):
            h = expit(lin - 0.3 * a - 0.4 * (k - 1))
            t[u[:, k - 1] < h, a] = k
    return Pairs(np.array([f"p{i}" for i in range(n_pairs)]), x, t, horizon)
