"""Effective sample size of direct-effect weights over time (Setting 2).

The competing event removes high-risk treated units early, so the treated
at-risk population drifts away from the population in which competing
events were eliminated. The population value comes from the exact at-risk
laws; the sample value is the Kish ESS of the self-normalized true weights.
Watch the two curves separate once the high-risk cell empties out.

    python demos/ess_curve.py
"""
from competing_hte.dgp import exact_at_risk_distribution, observational_at_risk_distribution, preset, sample_observational
from competing_hte.interventions import Direct
from competing_hte.weights import effective_sample_size, renyi2_relative_ess, true_weights

cfg = preset(2, 0.2)
ds = sample_observational(cfg, seed=0)

print(f"{'k':>3} {'at risk':>8} {'sample ESS':>11} {'population':>11}")
for k in range(1, cfg.horizon + 1, 3):
    w = true_weights(cfg, Direct(1), ds, k, 1)
    rel = renyi2_relative_ess(exact_at_risk_distribution(cfg, Direct(1), k), observational_at_risk_distribution(cfg, 1, k))
    print(f"{k:3d} {len(w):8d} {effective_sample_size(w).absolute_ess:11.1f} {rel * len(w):11.1f}")
