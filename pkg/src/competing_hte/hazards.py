"""Fitting the K x 2 x 2 grid of per-timestep hazard classifiers."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import classify
from .classify import ClassifierSpec, FittedClassifier, Logistic
from .data import Dataset, EventType, competing_at_risk, main_at_risk
from .errors import ShapeError, SingleArmError
from .weights import MEAN_ONE, estimated_weights, effective_sample_size, self_normalize, true_weights


class TrainingStrategy(str, Enum):
    OBSERVATIONAL = "observational"
    WEIGHTED_TRUE = "weighted_true"
    WEIGHTED_ESTIMATED = "weighted_estimated"
    COUNTERFACTUAL = "counterfactual"


@dataclass(frozen=True)
class CellDiagnostics:
    event: str
    k: int
    a: int
    n_at_risk: int
    ess: float
    converged: bool
    degenerate: bool  # empty at-risk set, hazard fixed at 0
    n_truncated: int = 0


_EMPTY = FittedClassifier("constant", p_hat=0.0, degenerate=True)


@dataclass(frozen=True, eq=False)
class HazardGrid:
    """Fitted hazards ``h_E(k, x, a)`` for both events, all steps and arms."""

    main: dict
    competing: dict
    horizon: int
    diagnostics: tuple = ()

    def cell(self, event, k, a) -> FittedClassifier:
        if not 1 <= k <= self.horizon:
            raise ShapeError(f"k={k} outside 1..{self.horizon}")
        table = self.main if event == EventType.MAIN else self.competing
        return table[(k, a)]

    def hazard_matrix(self, event, x, a):
        """``(n, K)`` matrix of clamped hazard predictions for rows of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        table = self.main if event == EventType.MAIN else self.competing
        return np.column_stack([classify.predict_proba(table[(k, a)], x) for k in range(1, self.horizon + 1)])


def predict_hazard(grid, event, k, x, a):
    if not 1 <= k <= grid.horizon:
        raise ShapeError(f"k={k} outside 1..{grid.horizon}")
    if isinstance(grid, HazardGrid):
        return classify.predict_proba(grid.cell(event, k, a), x)
    h = grid.hazard_matrix(event, np.atleast_2d(x), a)[:, k - 1]
    return float(h[0]) if np.ndim(x) == 1 else h


def fit_propensity(ds: Dataset, spec: ClassifierSpec | None = None) -> FittedClassifier:
    """P(A=1 | X) fitted on all units with unit weights."""
    if ds.n == 0:
        raise ValueError("empty dataset")
    if np.unique(ds.a).size < 2:
        raise SingleArmError("propensity model needs both arms in the data")
    return classify.fit(spec or Logistic(100.0), ds.x, ds.a)


# -- weight providers ------------------------------------------------------------


class TrueWeights:
    """Self-normalizable true weights for the per-arm interventions ``{a: spec}``."""

    def __init__(self, dgp, interventions):
        self.dgp = dgp
        self.interventions = interventions

    def __call__(self, ds, k, a):
        return true_weights(self.dgp, self.interventions[a], ds, k, a)


class EstimatedWeights:
    """Plug-in weights; ``pi_hat`` and ``hd_grid`` must be fitted on the same training data."""

    def __init__(self, pi_hat, hd_grid, interventions):
        self.pi_hat = pi_hat
        self.hd_grid = hd_grid
        self.interventions = interventions

    def __call__(self, ds, k, a):
        return estimated_weights(self.pi_hat, self.hd_grid, self.interventions[a], ds, k, a)


# -- cell fitting ------------------------------------------------------------------


def fit_competing_cells(ds: Dataset, spec: ClassifierSpec | None = None):
    spec = spec or Logistic(100.0)
    cells, diags = {}, []
    for a in (0, 1):
        for k in range(1, ds.horizon + 1):
            s = competing_at_risk(ds, k, a)
            m = classify.fit(spec, ds.x[s.indices], s.labels) if len(s) else _EMPTY
            cells[(k, a)] = m
            diags.append(CellDiagnostics("D", k, a, len(s), float(len(s)), m.converged, len(s) == 0))
    return cells, diags


def fit_main_cells(ds: Dataset, spec: ClassifierSpec, weights=None):
    cells, diags = {}, []
    for a in (0, 1):
        for k in range(1, ds.horizon + 1):
            s = main_at_risk(ds, k, a)
            if not len(s):
                cells[(k, a)] = _EMPTY
                diags.append(CellDiagnostics("Y", k, a, 0, 0.0, True, True))
                continue
            w, ess, n_trunc = None, float(len(s)), 0
            if weights is not None:
                table = weights(ds, k, a)
                if not np.array_equal(table.indices, s.indices):
                    raise ShapeError("weight table is not aligned with the main at-risk set")
                table = self_normalize(table, MEAN_ONE)
                w, n_trunc = table.values, table.n_truncated
                ess = effective_sample_size(table).absolute_ess
            m = classify.fit(spec, ds.x[s.indices], s.labels, w)
            cells[(k, a)] = m
            diags.append(CellDiagnostics("Y", k, a, len(s), ess, m.converged, False, n_trunc))
    return cells, diags


def fit_hazard_grid(
    ds: Dataset,
    main_spec: ClassifierSpec,
    strategy: TrainingStrategy = TrainingStrategy.OBSERVATIONAL,
    weights=None,
    competing_spec: ClassifierSpec | None = None,
    competing=None,
) -> HazardGrid:
    """Fit competing cells (unit weights) then main cells (strategy weights).

    ``weights`` is a provider ``(ds, k, a) -> WeightTable`` such as
    :class:`TrueWeights` or :class:`EstimatedWeights`; it is required for the
    weighted strategies. For ``COUNTERFACTUAL`` pass an interventional sample
    as ``ds``. ``competing`` may carry pre-fitted ``(cells, diagnostics)``
    from :func:`fit_competing_cells` on the same ``ds``.
    """
    strategy = TrainingStrategy(strategy)
    weighted = strategy in (TrainingStrategy.WEIGHTED_TRUE, TrainingStrategy.WEIGHTED_ESTIMATED)
    if weighted and weights is None:
        raise ValueError(f"strategy {strategy.value} needs a weight provider")
    comp_cells, comp_diags = competing if competing is not None else fit_competing_cells(ds, competing_spec)
    main_cells, main_diags = fit_main_cells(ds, main_spec, weights if weighted else None)
    return HazardGrid(main_cells, comp_cells, ds.horizon, tuple(comp_diags) + tuple(main_diags))


def write_diagnostics_csv(grid: HazardGrid, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["event", "k", "a", "n_at_risk", "ess", "converged"])
        for d in grid.diagnostics:
            out.writerow([d.event, d.k, d.a, d.n_at_risk, f"{d.ess:.6g}", int(d.converged)])
