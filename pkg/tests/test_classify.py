import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import expit, logit

from competing_hte.classify import (
    EPS,
    ClassifierSpec,
    Constant,
    FittedClassifier,
    Logistic,
    _fit_logistic,
    fit,
    penalized_loss,
    predict_proba,
    select_c,
)
from competing_hte.errors import ConfigError, EmptyAtRiskSet, ShapeError

Y = np.array([1, 0, 0, 1])
X = np.zeros((4, 1))


def test_constant_examples():
    assert fit(Constant(), X, Y).p_hat == 0.5
    assert fit(Constant(), X, Y, [1, 1, 1, 0]).p_hat == pytest.approx(1 / 3)


def test_spec_validation():
    with pytest.raises(ConfigError):
        ClassifierSpec("forest")
    with pytest.raises(ConfigError):
        Logistic(c=0)
    with pytest.raises(ConfigError):
        ClassifierSpec.from_dict({"kind": "logistic", "C": 1})


def test_empty_input():
    with pytest.raises(EmptyAtRiskSet):
        fit(Constant(), np.zeros((0, 1)), [])


def test_logistic_strong_penalty_gives_intercept_only():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(2000, 2))
    y = np.zeros(2000)
    y[:600] = 1
    m = fit(Logistic(c=1e-6), x, y)
    assert np.abs(m.coef).max() < 1e-4
    assert m.intercept == pytest.approx(logit(0.3), abs=1e-4)


def test_logistic_matches_generic_optimizer():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(500, 3))
    y = (rng.random(500) < expit(0.5 + x @ [1.0, -2.0, 0.3])).astype(float)
    w = rng.uniform(0.2, 3.0, 500)
    m = fit(Logistic(c=0.5), x, y, w)
    ref = minimize(penalized_loss, np.zeros(4), args=(x, y, w, 0.5), method="BFGS", options={"gtol": 1e-9})
    np.testing.assert_allclose(np.r_[m.intercept, m.coef], ref.x, atol=1e-4)
    assert m.converged


def test_logistic_recovers_true_parameters():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(100_000, 2))
    beta = np.array([-1.0, 0.8, -0.5])
    y = (rng.random(len(x)) < expit(beta[0] + x @ beta[1:])).astype(float)
    m = fit(Logistic(c=100), x, y)
    assert np.abs(np.r_[m.intercept, m.coef] - beta).max() < 0.05


def test_constant_consistency():
    rng = np.random.default_rng(3)
    n, p = 100_000, 0.07
    m = fit(Constant(), np.zeros((n, 1)), rng.random(n) < p)
    assert abs(m.p_hat - p) < 3 * np.sqrt(p * (1 - p) / n)


def test_degenerate_labels_fall_back_to_constant():
    m = fit(Logistic(), np.arange(5.0).reshape(-1, 1), np.zeros(5))
    assert m.kind == "constant" and m.degenerate and m.p_hat == 0
    assert predict_proba(m, [3.0]) == EPS


def test_separable_data_does_not_diverge():
    x = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    y = np.array([0, 0, 1, 1])
    m = fit(Logistic(c=1e6, max_iter=50), x, y)
    assert np.isfinite(m.coef).all()


def test_objective_nonincreasing_across_iterations():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(300, 2)) * 3
    y = (rng.random(300) < expit(2 * x[:, 0])).astype(float)
    w = np.ones(300)
    losses = []
    for it in range(1, 8):
        beta, _, _ = _fit_logistic(x, y, w, Logistic(c=10, max_iter=it, tol=1e-300))
        losses.append(penalized_loss(beta, x, y, w, 10))
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_predict_examples():
    assert predict_proba(FittedClassifier("constant", p_hat=0.1), [5.0, 1.0]) == 0.1
    zero = FittedClassifier("logistic", intercept=0.0, coef=np.zeros(2))
    assert predict_proba(zero, [3.0, -1.0]) == 0.5
    m = FittedClassifier("logistic", intercept=-3.0, coef=np.array([6.0]))
    assert predict_proba(m, [1.0]) == pytest.approx(0.95257, abs=1e-5)
    with pytest.raises(ShapeError):
        predict_proba(m, [1.0, 2.0])
    assert predict_proba(m, np.array([[1.0], [0.0]])).shape == (2,)


def test_weight_scale_invariance():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(400, 2))
    y = (rng.random(400) < expit(x[:, 0])).astype(float)
    w = rng.uniform(0.5, 2, 400)
    assert fit(Constant(), x, y, 7 * w).p_hat == pytest.approx(fit(Constant(), x, y, w).p_hat, rel=1e-14)
    a = fit(Logistic(c=2.0), x, y, w)
    b = fit(Logistic(c=2.0 / 7), x, y, 7 * w)
    np.testing.assert_allclose(np.r_[a.intercept, a.coef], np.r_[b.intercept, b.coef], atol=1e-7)


def test_select_c_picks_from_grid():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(1000, 2))
    y = (rng.random(1000) < expit(2 * x[:, 0])).astype(float)
    c = select_c(x, y)
    assert c in (1e-3, 1e-2, 1e-1, 1.0)
    # a strong signal is not best served by the heaviest penalty
    assert c > 1e-3
