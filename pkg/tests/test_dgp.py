import numpy as np
import pytest
from scipy.special import expit

from competing_hte.data import EventType
from competing_hte.dgp import (
    CELLS,
    DgpConfig,
    HazardSpec,
    cell_probabilities,
    exact_at_risk_distribution,
    exact_risk,
    preset,
    propensity,
    sample_covariates,
    sample_interventional,
    sample_observational,
    true_hazard,
)
from competing_hte.errors import ConfigError
from competing_hte.interventions import Direct, Separable, Total

from conftest import forward_risks

X1 = np.array([1.0, 0.0])
X0 = np.array([0.0, 0.0])


def test_covariate_conditionals():
    x = sample_covariates(200_000, 0.35, 1)
    hi = x[:, 0] == 1
    assert abs(x[hi, 1].mean() - 0.85) < 0.005
    assert abs(x[~hi, 1].mean() - 0.15) < 0.005
    assert abs(x[:, 1].mean() - 0.5) < 0.005


def test_covariates_independent_at_rho_zero():
    x = sample_covariates(200_000, 0.0, 2)
    assert abs(np.corrcoef(x.T)[0, 1]) < 0.01
    assert abs(x.mean(axis=0) - 0.5).max() < 0.005


def test_cell_probabilities_sum_and_values():
    p = cell_probabilities(0.35)
    np.testing.assert_allclose(p, [0.5 * 0.85, 0.5 * 0.15, 0.5 * 0.15, 0.5 * 0.85])


def test_invalid_rho():
    with pytest.raises(ConfigError):
        sample_covariates(10, 0.5, 0)


def test_true_hazard_examples():
    assert true_hazard(preset(1, 0), EventType.MAIN, 1, X1, 0) == pytest.approx(0.10)
    assert true_hazard(preset(3, 0.1), EventType.MAIN, 7, X1, 1) == pytest.approx(0.01)
    assert true_hazard(preset(2, 0.2), EventType.COMPETING, 3, X1, 1) == pytest.approx(0.21)


def test_propensity_examples():
    assert propensity(preset(1, 0), X1) == 0.5
    assert propensity(preset(1, 6), X1) == pytest.approx(0.95257, abs=1e-5)
    assert propensity(preset(1, 6), X0) == pytest.approx(0.04743, abs=1e-5)


def test_hazard_spec_bounds():
    with pytest.raises(ConfigError):
        HazardSpec(0.1, 0.0, 0.95, 0.1)
    with pytest.raises(ConfigError):
        HazardSpec(0.0)


def test_presets():
    c = preset(1, 6)
    x = CELLS
    np.testing.assert_allclose(c.hazard_main(x, 0), 0.01 * (1 - x[:, 0]) + 0.1 * x[:, 0])
    np.testing.assert_allclose(c.hazard_competing(x, 1), 0.01)
    np.testing.assert_allclose(c.propensity(x), expit(6 * (x[:, 0] - 0.5)))
    c4 = preset(4, -6)
    for a in (0, 1):
        np.testing.assert_allclose(c4.hazard_competing(x, a), 0.01 + 0.1 * x[:, 0] * a)
    np.testing.assert_allclose(preset(3, 0.01).hazard_competing(x, 1), 0.01)
    with pytest.raises(ConfigError):
        preset(5, 0)


def test_config_json_round_trip():
    c = preset(2, 0.15)
    assert DgpConfig.from_json(c.to_json()) == c


def test_certain_and_zero_hazards():
    certain = DgpConfig(hazard_main=HazardSpec(1, 0, 1, 0), hazard_competing=HazardSpec(1e-300, 0, 1e-300, 0), horizon=5)
    ds = sample_observational(certain, 0, n=100)
    assert (ds.t == 1).all() and (ds.e == EventType.MAIN).all()
    tiny = HazardSpec(1e-300, 0, 1e-300, 0)
    none = DgpConfig(hazard_main=tiny, hazard_competing=tiny, horizon=5)
    ds = sample_observational(none, 0, n=100)
    assert (ds.t == 6).all() and (ds.e == EventType.NONE).all()


def test_treatment_balance_at_xi_zero():
    ds = sample_observational(preset(1, 0), 3, n=100_000)
    se = np.sqrt(0.25 / ds.n)
    assert abs(ds.a.mean() - 0.5) < 3 * se


def test_reproducible():
    cfg = preset(2, 0.1)
    assert sample_observational(cfg, 7, 2000) == sample_observational(cfg, 7, 2000)
    assert sample_observational(cfg, 7, 2000) != sample_observational(cfg, 8, 2000)


def test_interventional_samples():
    cfg = preset(2, 0.2)
    d = sample_interventional(cfg, Direct(1), 0, 20_000)
    assert not (d.e == EventType.COMPETING).any() and (d.a == 1).all()
    # separable(a, a) and total(a) are the same law; with shared streams, the same sample
    assert sample_interventional(cfg, Separable(1, 1), 0, 5000) == sample_interventional(cfg, Total(1), 0, 5000)
    s = sample_interventional(cfg, Separable(0, 1), 0, 10)
    assert (s.a == 0).all()


def test_direct_mc_matches_exact_risk_setting3():
    cfg = preset(3, 0.1)
    ds = sample_interventional(cfg, Direct(0), 11, 1_000_000)
    hi = ds.x[:, 0] == 1
    freq = (ds.e[hi] == EventType.MAIN).mean()
    p = exact_risk(cfg, Direct(0), X1, 30)
    assert abs(freq - p) < 3 * np.sqrt(p * (1 - p) / hi.sum())


def test_at_risk_distribution_k1_is_marginal():
    cfg = preset(1, 6)
    for spec in (Total(0), Direct(1), Separable(1, 0)):
        np.testing.assert_allclose(exact_at_risk_distribution(cfg, spec, 1), cell_probabilities(cfg.rho))


def test_at_risk_distribution_direct_k11():
    cfg = preset(1, 6, rho=0.0)
    m = exact_at_risk_distribution(cfg, Direct(0), 11)
    x1 = m[2] + m[3]
    raw0, raw1 = 0.5 * 0.99**10, 0.5 * 0.9**10
    assert raw0 == pytest.approx(0.45221, abs=1e-4) and raw1 == pytest.approx(0.17433, abs=1e-4)
    assert 1 - x1 == pytest.approx(0.7218, abs=1e-4)
    assert x1 == pytest.approx(0.2782, abs=1e-4)


def test_direct_equals_total_without_competing():
    cfg = DgpConfig(hazard_competing=HazardSpec(1e-300, 0, 1e-300, 0))
    for k in (1, 5, 30):
        np.testing.assert_allclose(
            exact_at_risk_distribution(cfg, Direct(1), k), exact_at_risk_distribution(cfg, Total(1), k)
        )


def _const(hy, hd0, hd1=None):
    hd1 = hd0 if hd1 is None else hd1
    return DgpConfig(
        rho=0.0,
        hazard_main=HazardSpec(hy, 0, hy, 0),
        hazard_competing=HazardSpec(hd0, hd1 - hd0, hd0, hd1 - hd0),
        horizon=5,
    )


def test_exact_risk_hand_values():
    cfg = _const(0.1, 0.01)
    # the main event at step l also needs no competing event at l
    assert exact_risk(cfg, Total(0), X0, 2) == pytest.approx(0.1 * 0.99 + 0.1 * 0.99 * 0.9 * 0.99, abs=1e-15)
    assert exact_risk(cfg, Total(0), X0, 2) == pytest.approx(0.187209, abs=1e-6)
    assert exact_risk(cfg, Direct(0), X0, 2) == pytest.approx(0.19, abs=1e-15)
    sep = _const(0.1, 0.01, 0.11)
    assert exact_risk(sep, Separable(0, 1), X0, 2) == pytest.approx(0.1 * 0.89 + 0.1 * 0.89 * 0.9 * 0.89, abs=1e-15)


def test_exact_risk_matches_forward_propagation():
    cfg = preset(2, 0.2)
    for spec in (Total(0), Total(1), Direct(0), Direct(1), Separable(0, 1), Separable(1, 0)):
        a_y, a_d, keep = spec.resolve()
        for x in CELLS:
            hy = [true_hazard(cfg, EventType.MAIN, 1, x, a_y)] * 30
            hd = [true_hazard(cfg, EventType.COMPETING, 1, x, a_d) if keep else 0.0] * 30
            fwd = forward_risks(hy, hd)
            for k in (1, 2, 10, 30):
                assert exact_risk(cfg, spec, x, k) == pytest.approx(fwd[k - 1][0], abs=1e-13)


def test_exact_risk_monotone_and_direct_dominates():
    cfg = preset(4, 6)
    prev = np.zeros(4)
    for k in range(1, 31):
        r = exact_risk(cfg, Total(1), CELLS, k)
        assert (r >= prev).all() and (r <= 1).all()
        assert (exact_risk(cfg, Direct(1), CELLS, k) >= r).all()
        prev = r
    np.testing.assert_array_equal(exact_risk(cfg, Separable(1, 1), CELLS, 30), exact_risk(cfg, Total(1), CELLS, 30))
