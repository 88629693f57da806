"""Evaluation metrics and replication summaries."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .data import EventType
from .dgp import CELLS, DgpConfig, exact_at_risk_distribution, exact_risk
from .errors import InsufficientReplications
from .interventions import (
    Direct,
    DirectRiskDiff,
    Separable,
    SeparableDirectRiskDiff,
    SeparableIndirectRiskDiff,
    Total,
    TotalRiskDiff,
)
from . import effects


@dataclass(frozen=True)
class ReplicationSummary:
    mean: float
    std_error: float
    n_reps: int


def true_hte(cfg: DgpConfig, kind, x, k: int):
    """Exact effect of ``kind`` at horizon ``k`` from the closed-form risks."""
    if isinstance(kind, TotalRiskDiff):
        pair = Total(1), Total(0)
    elif isinstance(kind, DirectRiskDiff):
        pair = Direct(1), Direct(0)
    elif isinstance(kind, SeparableDirectRiskDiff):
        pair = Separable(1, kind.a_d), Separable(0, kind.a_d)
    elif isinstance(kind, SeparableIndirectRiskDiff):
        pair = Separable(kind.a_y, 1), Separable(kind.a_y, 0)
    else:
        raise TypeError(f"unknown effect kind {kind!r}")
    return exact_risk(cfg, pair[0], x, k) - exact_risk(cfg, pair[1], x, k)


def rmse_tau(grid, dgp: DgpConfig, kind, test_x, K: int | None = None) -> float:
    """Root mean squared error of the estimated effect over the test rows."""
    K = dgp.horizon if K is None else K
    X = np.atleast_2d(test_x)
    # the synthetic covariates take four values; evaluate each once
    cells, inverse = np.unique(X, axis=0, return_inverse=True)
    err = effects.hte(grid, cells, kind, K) - true_hte(dgp, kind, cells, K)
    return float(np.sqrt(np.mean(err[inverse.reshape(-1)] ** 2)))


def rmse_haz(grid, dgp: DgpConfig, spec, a: int, k: int) -> float:
    """Hazard RMSE at ``(k, a)`` under the exact interventional at-risk law of ``spec``."""
    if spec.arm != a:
        raise ValueError(f"{spec.label} targets arm {spec.arm}, not {a}")
    mass = exact_at_risk_distribution(dgp, spec, k)
    truth = dgp.hazard_main(CELLS, a)
    est = grid.hazard_matrix(EventType.MAIN, CELLS, a)[:, k - 1]
    return float(np.sqrt(np.dot(mass, (truth - est) ** 2)))


def summarize(values) -> ReplicationSummary:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise InsufficientReplications(f"need at least 2 replications, got {v.size}")
    return ReplicationSummary(float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size)), int(v.size))


def sign_test(larger, smaller) -> float:
    """One-sided paired sign test p-value for ``larger > smaller``; ties dropped."""
    d = np.asarray(larger, dtype=float) - np.asarray(smaller, dtype=float)
    wins, losses = int((d > 0).sum()), int((d < 0).sum())
    if wins + losses == 0:
        return 1.0
    return float(stats.binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue)


def mean_difference(a, b):
    """Difference of replication means and its standard error ``sqrt(se_a^2 + se_b^2)``."""
    sa, sb = summarize(a), summarize(b)
    return sa.mean - sb.mean, float(np.hypot(sa.std_error, sb.std_error))


def paired_difference(a, b):
    """Mean of per-replication differences ``a - b`` and its standard error."""
    s = summarize(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return s.mean, s.std_error
