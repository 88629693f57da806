"""Heterogeneous treatment effects under competing risks in discrete time.

Per-timestep hazard classifiers are fitted on at-risk sets, optionally
reweighted toward the covariate distribution of a target intervention
(total, direct or separable), and combined into counterfactual risks.
"""
from .classify import ClassifierSpec, Constant, Logistic, fit, predict_proba
from .data import AtRiskSample, Dataset, EventRecord, EventType, competing_at_risk, main_at_risk
from .dgp import DgpConfig, HazardSpec, OracleGrid, exact_risk, preset, sample_interventional, sample_observational
from .effects import direct_risk, hte, risk, rmst, separable_risk, total_risk
from .errors import CompetingHTEError, ConfigError, DataError
from .hazards import HazardGrid, TrainingStrategy, fit_hazard_grid, fit_propensity
from .interventions import (
    Direct,
    DirectRiskDiff,
    Separable,
    SeparableDirectRiskDiff,
    SeparableIndirectRiskDiff,
    Total,
    TotalRiskDiff,
)
from .metrics import rmse_haz, rmse_tau, summarize
from .seeding import Role, seed_for
from .weights import effective_sample_size, estimated_weights, renyi2_relative_ess, self_normalize, true_weights

__version__ = "0.1.0"

__all__ = [
    "ClassifierSpec",
    "Constant",
    "Logistic",
    "fit",
    "predict_proba",
    "AtRiskSample",
    "Dataset",
    "EventRecord",
    "EventType",
    "competing_at_risk",
    "main_at_risk",
    "DgpConfig",
    "HazardSpec",
    "OracleGrid",
    "exact_risk",
    "preset",
    "sample_interventional",
    "sample_observational",
    "direct_risk",
    "hte",
    "risk",
    "rmst",
    "separable_risk",
    "total_risk",
    "CompetingHTEError",
    "ConfigError",
    "DataError",
    "HazardGrid",
    "TrainingStrategy",
    "fit_hazard_grid",
    "fit_propensity",
    "Direct",
    "DirectRiskDiff",
    "Separable",
    "SeparableDirectRiskDiff",
    "SeparableIndirectRiskDiff",
    "Total",
    "TotalRiskDiff",
    "rmse_haz",
    "rmse_tau",
    "summarize",
    "Role",
    "seed_for",
    "effective_sample_size",
    "estimated_weights",
    "renyi2_relative_ess",
    "self_normalize",
    "true_weights",
]
