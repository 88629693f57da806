"""Counterfactual risks, treatment effects and RMST from hazard grids.

Any object with ``horizon`` and ``hazard_matrix(event, x, a) -> (n, K)``
works as a grid: fitted :class:`~competing_hte.hazards.HazardGrid`, the true
:class:`~competing_hte.dgp.OracleGrid`, or :class:`ArrayGrid`.

Within a step the competing event is resolved before the main event, and the
main hazard is conditional on no competing event at that step. The main
event therefore occurs at step ``l`` with probability

    h_Y(l) * (1 - h_D(l)) * prod_{q<l} (1 - h_Y(q)) (1 - h_D(q)).
"""
from __future__ import annotations

import csv

import numpy as np

from .data import EventType
from .interventions import (
    Direct,
    DirectRiskDiff,
    Separable,
    SeparableDirectRiskDiff,
    SeparableIndirectRiskDiff,
    Total,
    TotalRiskDiff,
)


class ArrayGrid:
    """Covariate-free grid from ``(2, K)`` arrays indexed ``[a, k - 1]``."""

    def __init__(self, main, competing):
        self.main = np.asarray(main, dtype=float)
        self.competing = np.asarray(competing, dtype=float)
        if self.main.shape != self.competing.shape or self.main.ndim != 2 or self.main.shape[0] != 2:
            raise ValueError("main and competing must both be (2, K) arrays")
        self.horizon = self.main.shape[1]

    def hazard_matrix(self, event, x, a):
        n = np.atleast_2d(x).shape[0]
        table = self.main if event == EventType.MAIN else self.competing
        return np.repeat(table[a][None, :], n, axis=0)


def _rows(x):
    x = np.asarray(x, dtype=float)
    return x.ndim <= 1, np.atleast_2d(x)


def _out(single, v):
    return float(v[0]) if single else v


def _check_k(grid, k):
    if not 1 <= k <= grid.horizon:
        raise ValueError(f"horizon k={k} outside 1..{grid.horizon}")


def incidence_curves(h_main, h_comp):
    """Cumulative incidence of both events, ``(n, K)`` each, from hazard matrices."""
    surv = np.cumprod((1 - h_main) * (1 - h_comp), axis=1)
    before = np.hstack([np.ones((surv.shape[0], 1)), surv[:, :-1]])
    main = np.cumsum(h_main * (1 - h_comp) * before, axis=1)
    comp = np.cumsum(h_comp * before, axis=1)
    return main, comp, surv


def _hazards(grid, X, spec):
    a_main, a_comp, keep = spec.resolve()
    h_y = grid.hazard_matrix(EventType.MAIN, X, a_main)
    h_d = grid.hazard_matrix(EventType.COMPETING, X, a_comp) if keep else np.zeros_like(h_y)
    return h_y, h_d


def risk(grid, x, spec, k: int):
    """Main-event risk by step ``k`` under any intervention."""
    _check_k(grid, k)
    single, X = _rows(x)
    h_y, h_d = _hazards(grid, X, spec)
    main, _, _ = incidence_curves(h_y[:, :k], h_d[:, :k])
    return _out(single, main[:, -1])


def total_risk(grid, x, a: int, k: int):
    return risk(grid, x, Total(a), k)


def direct_risk(grid, x, a: int, k: int):
    return risk(grid, x, Direct(a), k)


def separable_risk(grid, x, a_y: int, a_d: int, k: int):
    return risk(grid, x, Separable(a_y, a_d), k)


def competing_risk(grid, x, a: int, k: int):
    """Competing-event cumulative incidence by step ``k`` in arm ``a``."""
    _check_k(grid, k)
    single, X = _rows(x)
    h_y, h_d = _hazards(grid, X, Total(a))
    _, comp, _ = incidence_curves(h_y[:, :k], h_d[:, :k])
    return _out(single, comp[:, -1])


def hte(grid, x, kind, k: int):
    """Risk difference of the given effect kind at horizon ``k``."""
    if isinstance(kind, TotalRiskDiff):
        return total_risk(grid, x, 1, k) - total_risk(grid, x, 0, k)
    if isinstance(kind, DirectRiskDiff):
        return direct_risk(grid, x, 1, k) - direct_risk(grid, x, 0, k)
    if isinstance(kind, SeparableDirectRiskDiff):
        return separable_risk(grid, x, 1, kind.a_d, k) - separable_risk(grid, x, 0, kind.a_d, k)
    if isinstance(kind, SeparableIndirectRiskDiff):
        return separable_risk(grid, x, kind.a_y, 1, k) - separable_risk(grid, x, kind.a_y, 0, k)
    raise TypeError(f"unknown effect kind {kind!r}")


def rmst(grid, x, spec, K: int | None = None):
    """Expected event-free time truncated at ``K``: ``1 + sum_{l<K} prod_{q<=l} S_q``."""
    K = grid.horizon if K is None else K
    _check_k(grid, K)
    single, X = _rows(x)
    h_y, h_d = _hazards(grid, X, spec)
    surv = np.cumprod((1 - h_y[:, : K - 1]) * (1 - h_d[:, : K - 1]), axis=1)
    return _out(single, 1.0 + surv.sum(axis=1))


def write_effects_csv(path, x, kind, k, tau_hat):
    X = np.atleast_2d(x)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow([f"x{j}" for j in range(X.shape[1])] + ["kind", "k", "tau_hat"])
        for row, tau in zip(X, np.atleast_1d(tau_hat)):
            out.writerow([repr(float(v)) for v in row] + [kind.name, k, repr(float(tau))])
