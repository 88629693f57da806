"""Importance weights correcting intervention-specific covariate shift.

For the main-event hazard at step ``k`` in arm ``a``, the observational
at-risk law is proportional to

    P(x) * pi_a(x) * prod_{l<=k} (1 - h_D(l, x, a)) * prod_{l<k} (1 - h_Y(l, x, a))

and the weights are the ratio of the interventional law to it:

* ``Total(a)``: ``1 / pi_a(x)``
* ``Direct(a)``: ``1 / (pi_a(x) * prod_{l<=k} (1 - h_D(l, x, a)))``
* ``Separable(a_y, a_d)``: ``prod_{l<=k} (1 - h_D(l, x, a_d)) /
  (pi_{a_y}(x) * prod_{l<=k} (1 - h_D(l, x, a_y)))``

Denominators are floored at ``FLOOR``; floored units are counted in
``WeightTable.n_truncated``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, EventType, main_at_risk
from .errors import DegenerateWeights, PositivityError
from .interventions import Direct, InterventionSpec, Separable

FLOOR = 1e-6

RAW, MEAN_ONE, SUM_ONE = "raw", "mean_one", "sum_one"


@dataclass(frozen=True, eq=False)
class WeightTable:
    values: np.ndarray
    indices: np.ndarray
    normalization: str = RAW
    k: int = 0
    a: int = 0
    intervention: str = ""
    n_truncated: int = 0

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class EssReport:
    absolute_ess: float
    relative_ess: float
    n: int


def _check_arm(spec, a):
    if spec.arm != a:
        raise ValueError(f"{spec.label} trains main-event hazards on arm {spec.arm}, not arm {a}")


def _weights(prop_fn, comp_fn, spec, ds, k, a):
    _check_arm(spec, a)
    sample = main_at_risk(ds, k, a)
    idx = sample.indices
    x = ds.x[idx]
    if len(idx) == 0:
        return WeightTable(np.zeros(0), idx, RAW, k, a, spec.label, 0)

    pi1 = np.asarray(prop_fn(x), dtype=float)
    pi_a = pi1 if a == 1 else 1 - pi1
    truncated = pi_a < FLOOR
    denom = np.maximum(pi_a, FLOOR)

    numer = np.ones(len(idx))
    # Separable(a, a) has identical competing products that cancel exactly
    shifted_separable = isinstance(spec, Separable) and spec.a_d != spec.a_y
    if isinstance(spec, Direct) or shifted_separable:
        surv_a = np.prod(1 - comp_fn(x, a)[:, :k], axis=1)
        truncated |= surv_a < FLOOR
        denom = denom * np.maximum(surv_a, FLOOR)
    if shifted_separable:
        numer = np.prod(1 - comp_fn(x, spec.a_d)[:, :k], axis=1)
    return WeightTable(numer / denom, idx, RAW, k, a, spec.label, int(truncated.sum()))


def true_weights(dgp, spec: InterventionSpec, ds: Dataset, k: int, a: int) -> WeightTable:
    """Weights from the true propensity and competing hazards.

    ``dgp`` needs ``propensity(x)`` and ``hazard_matrix(event, x, a)``; both
    :class:`~competing_hte.dgp.DgpConfig` and the semi-synthetic truth qualify.
    """

    def comp(x, arm):
        return dgp.hazard_matrix(EventType.COMPETING, x, np.full(len(x), arm))

    return _weights(dgp.propensity, comp, spec, ds, k, a)


def estimated_weights(pi_hat, hd_grid, spec: InterventionSpec, ds: Dataset, k: int, a: int) -> WeightTable:
    """Plug-in weights from a fitted propensity model and competing-hazard grid."""

    def comp(x, arm):
        return hd_grid.hazard_matrix(EventType.COMPETING, x, arm)

    return _weights(pi_hat.predict_proba, comp, spec, ds, k, a)


def self_normalize(w: WeightTable, mode: str = MEAN_ONE) -> WeightTable:
    total = float(np.sum(w.values))
    if not total > 0:
        raise DegenerateWeights("cannot normalize weights that sum to zero")
    if mode == MEAN_ONE:
        vals = w.values * (len(w.values) / total)
    elif mode == SUM_ONE:
        vals = w.values / total
    else:
        raise ValueError(f"unknown normalization {mode!r}")
    return replace(w, values=vals, normalization=mode)


def effective_sample_size(w: WeightTable) -> EssReport:
    """Kish ESS ``1 / sum(w_bar^2)`` of sum-one weights."""
    if w.normalization != SUM_ONE:
        w = self_normalize(w, SUM_ONE)
    n = len(w.values)
    abs_ess = 1.0 / float(np.dot(w.values, w.values))
    return EssReport(abs_ess, abs_ess / n, n)


def renyi2_relative_ess(p_int, p_obs) -> float:
    """Population relative ESS ``1 / sum_x p_int(x)^2 / p_obs(x)`` in (0, 1]."""
    p_int = np.asarray(p_int, dtype=float)
    p_obs = np.asarray(p_obs, dtype=float)
    if p_int.shape != p_obs.shape:
        raise ValueError("distributions must share a support")
    support = p_int > 0
    if (p_obs[support] <= 0).any():
        raise PositivityError("p_obs must be positive wherever p_int is")
    return 1.0 / float(np.sum(p_int[support] ** 2 / p_obs[support]))


def write_ess_csv(rows, path):
    """Rows of ``(intervention, k, a, n, abs_ess, rel_ess, n_truncated)``."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["intervention", "k", "a", "n", "abs_ess", "rel_ess", "n_truncated"])
        for r in rows:
            out.writerow(r)


def ess_row(w: WeightTable):
    rep = effective_sample_size(w) if len(w) else EssReport(0.0, 0.0, 0)
    return (w.intervention, w.k, w.a, rep.n, rep.absolute_ess, rep.relative_ess, w.n_truncated)
