"""Weighted binary classifiers used as per-timestep hazard models.

Two model families:

* ``Constant`` -- the weighted event rate; one per (k, a) cell this is the
  discrete-time Kaplan-Meier hazard.
* ``Logistic`` -- L2-penalized logistic regression minimizing
  ``sum_i w_i * logloss_i + ||beta||^2 / (2 c)`` with an unpenalized intercept,
  fitted by damped iteratively reweighted least squares (Newton). Larger ``c``
  means weaker regularization.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logit

from .errors import ConfigError, EmptyAtRiskSet, ShapeError

EPS = 1e-12


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "constant"
    c: float = 1.0
    max_iter: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("constant", "logistic"):
            raise ConfigError(f"unknown classifier kind {self.kind!r}")
        if not self.c > 0 or self.max_iter < 1 or not self.tol > 0:
            raise ConfigError("need c > 0, max_iter >= 1, tol > 0")

    def to_dict(self):
        return {"kind": self.kind, "c": self.c, "max_iter": self.max_iter, "tol": self.tol}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def Constant() -> ClassifierSpec:
    return ClassifierSpec("constant")


def Logistic(c: float = 100.0, max_iter: int = 100, tol: float = 1e-8) -> ClassifierSpec:
    return ClassifierSpec("logistic", c=c, max_iter=max_iter, tol=tol)


@dataclass(frozen=True, eq=False)
class FittedClassifier:
    kind: str
    p_hat: float = 0.0
    intercept: float = 0.0
    coef: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_iter: int = 0
    converged: bool = True
    n_eff: float = 0.0
    degenerate: bool = False

    @property
    def dim(self):
        return len(self.coef) if self.kind == "logistic" else None

    def predict_proba(self, x):
        return predict_proba(self, x)


def _kish(w):
    s = w.sum()
    return float(s * s / np.dot(w, w)) if s > 0 else 0.0


def _check_inputs(features, labels, weights):
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(labels, dtype=float).reshape(-1)
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if len(y) == 0:
        raise EmptyAtRiskSet("cannot fit a classifier on an empty sample")
    if not (X.shape[0] == len(y) == len(w)):
        raise ShapeError(f"rows mismatch: features={X.shape[0]}, labels={len(y)}, weights={len(w)}")
    if (w < 0).any() or not np.isfinite(w).all():
        raise ValueError("weights must be finite and nonnegative")
    if not w.sum() > 0:
        raise ValueError("weights are all zero")
    return X, y, w


def penalized_loss(beta, X, y, w, c):
    """Weighted log-loss plus ``||beta[1:]||^2 / (2c)``; ``beta[0]`` is the intercept."""
    eta = beta[0] + X @ beta[1:]
    # -[y log s + (1-y) log(1-s)] = log(1 + e^eta) - y * eta
    nll = np.dot(w, np.logaddexp(0.0, eta) - y * eta)
    return float(nll + np.dot(beta[1:], beta[1:]) / (2 * c))


def _fit_logistic(X, y, w, spec):
    n, d = X.shape
    Z = np.column_stack([np.ones(n), X])
    lam = np.full(d + 1, 1.0 / spec.c)
    lam[0] = 0.0
    beta = np.zeros(d + 1)
    beta[0] = logit(np.clip(np.dot(w, y) / w.sum(), 1e-6, 1 - 1e-6))
    obj = penalized_loss(beta, X, y, w, spec.c)
    converged = False
    it = 0
    for it in range(1, spec.max_iter + 1):
        p = expit(Z @ beta)
        grad = Z.T @ (w * (p - y)) + lam * beta
        hess = (Z * (w * p * (1 - p))[:, None]).T @ Z + np.diag(lam)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        # halve until the objective does not increase
        scale = 1.0
        while True:
            cand = beta - scale * step
            cand_obj = penalized_loss(cand, X, y, w, spec.c)
            if cand_obj <= obj or scale < 1e-10:
                break
            scale *= 0.5
        if cand_obj > obj:
            converged = np.max(np.abs(step)) < spec.tol
            break
        delta = np.max(np.abs(cand - beta))
        beta, obj = cand, cand_obj
        if delta < spec.tol:
            converged = True
            break
    return beta, it, converged


def fit(spec: ClassifierSpec, features, labels, weights=None) -> FittedClassifier:
    """Fit a weighted classifier. Raises ``EmptyAtRiskSet`` on empty input."""
    X, y, w = _check_inputs(features, labels, weights)
    n_eff = _kish(w)
    p_bar = float(np.dot(w, y) / w.sum())
    if spec.kind == "constant":
        return FittedClassifier("constant", p_hat=p_bar, n_eff=n_eff, degenerate=p_bar in (0.0, 1.0))
    if p_bar in (0.0, 1.0):
        # no variation in the labels; the intercept-only optimum is the boundary
        return FittedClassifier("constant", p_hat=p_bar, n_eff=n_eff, degenerate=True)
    beta, it, converged = _fit_logistic(X, y, w, spec)
    return FittedClassifier(
        "logistic",
        p_hat=p_bar,
        intercept=float(beta[0]),
        coef=beta[1:].copy(),
        n_iter=it,
        converged=bool(converged),
        n_eff=n_eff,
    )


def predict_proba(model: FittedClassifier, x):
    """P(y=1 | x) clamped to ``[EPS, 1 - EPS]``; scalar for a single row."""
    xs = np.asarray(x, dtype=float)
    single = xs.ndim <= 1
    X = xs.reshape(1, -1) if single else xs
    if model.kind == "constant":
        p = np.full(X.shape[0], model.p_hat)
    else:
        if X.shape[1] != len(model.coef):
            raise ShapeError(f"expected {len(model.coef)} features, got {X.shape[1]}")
        p = expit(model.intercept + X @ model.coef)
    p = np.clip(p, EPS, 1 - EPS)
    return float(p[0]) if single else p


def log_loss(model, X, y, w=None):
    p = predict_proba(model, np.atleast_2d(X))
    w = np.ones(len(y)) if w is None else np.asarray(w, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(-np.dot(w, y * np.log(p) + (1 - y) * np.log(1 - p)) / w.sum())


def select_c(features, labels, weights=None, grid=(1e-3, 1e-2, 1e-1, 1.0), folds=5, seed=0):
    """Pick the logistic ``c`` with the lowest 5-fold weighted log-loss."""
    X, y, w = _check_inputs(features, labels, weights)
    fold = np.random.default_rng(seed).permutation(len(y)) % folds
    best_c, best = grid[0], np.inf
    for c in grid:
        spec = Logistic(c=c)
        losses = []
        for f in range(folds):
            tr, te = fold != f, fold == f
            if not te.any() or not tr.any() or w[tr].sum() == 0:
                continue
            m = fit(spec, X[tr], y[tr], w[tr])
            losses.append(log_loss(m, X[te], y[te], w[te]))
        score = float(np.mean(losses)) if losses else np.inf
        if score < best:
            best_c, best = c, score
    return best_c
