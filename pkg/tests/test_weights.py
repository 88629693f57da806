import numpy as np
import pytest

from competing_hte.data import Dataset
from competing_hte.dgp import DgpConfig, HazardSpec, preset, sample_observational
from competing_hte.errors import DegenerateWeights, PositivityError
from competing_hte.hazards import fit_competing_cells, fit_propensity, HazardGrid
from competing_hte.interventions import Direct, Separable, Total
from competing_hte.weights import (
    MEAN_ONE,
    SUM_ONE,
    WeightTable,
    effective_sample_size,
    ess_row,
    estimated_weights,
    renyi2_relative_ess,
    self_normalize,
    true_weights,
    write_ess_csv,
)


def _flat(hd=0.01, n=50):
    cfg = DgpConfig(rho=0.0, hazard_competing=HazardSpec(hd, 0, hd, 0), xi=0.0)
    ds = Dataset(np.zeros((n, 2)), np.ones(n, int), np.full(n, 31), np.zeros(n, int), 30)
    return cfg, ds


def test_total_weights_homogeneous():
    cfg, ds = _flat()
    w = true_weights(cfg, Total(1), ds, 3, 1)
    np.testing.assert_allclose(w.values, 2.0)
    np.testing.assert_allclose(self_normalize(w, MEAN_ONE).values, 1.0)


def test_direct_weight_hand_value():
    cfg, ds = _flat()
    w = true_weights(cfg, Direct(1), ds, 2, 1)
    np.testing.assert_allclose(w.values, 1 / (0.5 * 0.99**2))
    assert w.values[0] == pytest.approx(2.04061, abs=1e-5)


def test_separable_same_arm_reduces_to_total():
    cfg = preset(4, 6)
    ds = sample_observational(cfg, 0, 3000)
    for a in (0, 1):
        np.testing.assert_array_equal(
            true_weights(cfg, Separable(a, a), ds, 10, a).values, true_weights(cfg, Total(a), ds, 10, a).values
        )


def test_separable_weight_formula():
    cfg = preset(2, 0.2)
    ds = sample_observational(cfg, 1, 3000)
    w = true_weights(cfg, Separable(1, 0), ds, 4, 1)
    x = ds.x[w.indices]
    pi1 = cfg.propensity(x)
    hd1 = 0.01 + 0.2 * x[:, 0]
    expected = (0.99**4) / (pi1 * (1 - hd1) ** 4)
    np.testing.assert_allclose(w.values, expected, rtol=1e-12)


def test_arm_mismatch_rejected():
    cfg, ds = _flat()
    with pytest.raises(ValueError):
        true_weights(cfg, Separable(0, 1), ds, 1, 1)


def test_estimated_equals_true_with_exact_plugins():
    cfg = preset(4, 6)
    ds = sample_observational(cfg, 2, 2000)

    class Exact:
        def predict_proba(self, x):
            return cfg.propensity(x)

    class Grid:
        def hazard_matrix(self, event, x, a):
            return cfg.hazard_matrix(event, x, np.full(len(x), a))

    for spec in (Total(1), Direct(1), Separable(1, 0)):
        np.testing.assert_array_equal(
            estimated_weights(Exact(), Grid(), spec, ds, 6, 1).values, true_weights(cfg, spec, ds, 6, 1).values
        )


def test_estimated_total_weights_close_to_true():
    cfg = preset(1, 6)
    ds = sample_observational(cfg, 3, 100_000)
    pi_hat = fit_propensity(ds)
    hd = HazardGrid({}, fit_competing_cells(ds)[0], 30)
    for a in (0, 1):
        est = estimated_weights(pi_hat, hd, Total(a), ds, 5, a).values
        tru = true_weights(cfg, Total(a), ds, 5, a).values
        assert np.mean(np.abs(est - tru)) < 0.05


def test_floor_sets_truncation_count():
    class Zero:
        def predict_proba(self, x):
            return np.zeros(len(x))

    class NoComp:
        def hazard_matrix(self, event, x, a):
            return np.zeros((len(x), 30))

    _, ds = _flat()
    w = estimated_weights(Zero(), NoComp(), Total(1), ds, 1, 1)
    assert w.n_truncated == ds.n
    np.testing.assert_allclose(w.values, 1e6)


def test_self_normalize_examples():
    t = WeightTable(np.array([2.0, 2.0, 2.0]), np.arange(3))
    np.testing.assert_allclose(self_normalize(t, MEAN_ONE).values, 1)
    t = WeightTable(np.array([1.0, 3.0]), np.arange(2))
    np.testing.assert_allclose(self_normalize(t, SUM_ONE).values, [0.25, 0.75])
    with pytest.raises(DegenerateWeights):
        self_normalize(WeightTable(np.zeros(2), np.arange(2)), SUM_ONE)


def test_ess_examples():
    r = effective_sample_size(WeightTable(np.array([0.5, 0.5]), np.arange(2), SUM_ONE))
    assert (r.absolute_ess, r.relative_ess) == pytest.approx((2, 1))
    r = effective_sample_size(WeightTable(np.array([0.9, 0.1]), np.arange(2), SUM_ONE))
    assert r.absolute_ess == pytest.approx(1.21951, abs=1e-5)
    n = 37
    r = effective_sample_size(WeightTable(np.full(n, 1 / n), np.arange(n), SUM_ONE))
    assert r.absolute_ess == pytest.approx(n)
    assert r.absolute_ess == pytest.approx(r.relative_ess * r.n)


def test_renyi_examples():
    assert renyi2_relative_ess([0.3, 0.7], [0.3, 0.7]) == pytest.approx(1)
    assert renyi2_relative_ess([1, 0], [0.5, 0.5]) == pytest.approx(0.5)
    assert renyi2_relative_ess([0.5, 0.5], [0.9, 0.1]) == pytest.approx(1 / (0.25 / 0.9 + 0.25 / 0.1))
    assert renyi2_relative_ess([0.5, 0.5], [0.9, 0.1]) == pytest.approx(0.36, abs=1e-9)
    with pytest.raises(PositivityError):
        renyi2_relative_ess([0.5, 0.5], [1.0, 0.0])


def test_raw_and_mean_one_give_same_constant_fit():
    from competing_hte.classify import Constant, fit

    cfg = preset(1, 6)
    ds = sample_observational(cfg, 4, 3000)
    w = true_weights(cfg, Direct(1), ds, 5, 1)
    from competing_hte.data import main_at_risk

    s = main_at_risk(ds, 5, 1)
    raw = fit(Constant(), ds.x[s.indices], s.labels, w.values).p_hat
    norm = fit(Constant(), ds.x[s.indices], s.labels, self_normalize(w, MEAN_ONE).values).p_hat
    assert raw == pytest.approx(norm, rel=1e-13)


def test_weighted_mean_transport():
    from competing_hte.data import main_at_risk
    from competing_hte.dgp import cell_index, exact_at_risk_distribution

    cfg = preset(2, 0.2)
    ds = sample_observational(cfg, 5, 100_000)
    k, a = 8, 1
    g = np.array([0.0, 1.0, 2.0, 5.0])  # arbitrary bounded function of the cell
    w = self_normalize(true_weights(cfg, Direct(a), ds, k, a), SUM_ONE).values
    s = main_at_risk(ds, k, a)
    vals = g[cell_index(ds.x[s.indices])]
    est = np.dot(w, vals)
    target = np.dot(exact_at_risk_distribution(cfg, Direct(a), k), g)
    se = np.sqrt(np.dot(w**2, (vals - est) ** 2))
    assert abs(est - target) < 3 * se


def test_ess_csv(tmp_path):
    t = WeightTable(np.array([1.0, 3.0]), np.arange(2), k=2, a=1, intervention="total(1)")
    path = tmp_path / "ess.csv"
    write_ess_csv([ess_row(t)], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "intervention,k,a,n,abs_ess,rel_ess,n_truncated"
    assert lines[1].startswith("total(1),2,1,2,1.6")
