"""Synthetic competing-risks data with two binary risk factors.

Covariates are ``x = (x1, x2)`` with ``X1 ~ Bernoulli(0.5)`` and
``X2 | X1 ~ Bernoulli(0.5 - rho * (1 - 2 * X1))``. Both event hazards are
constant over time and depend on a single support covariate and the arm.
Column indices (``support_index``, ``propensity_index``) are 0-based, so
``x1`` is column 0.

Random streams
--------------
``sample_observational(cfg, seed)`` splits ``numpy.random.SeedSequence(seed)``
into three children: covariates, treatment, events (or takes the three seeds
directly when ``seed`` is a tuple). The event stream is
consumed as a row-major ``(n, K, 2)`` block of uniforms (``[..., 0]`` for the
competing event, ``[..., 1]`` for the main event), so unit ``i`` always sees
the same uniforms regardless of chunking. ``sample_interventional`` uses the
same covariate and event children, which couples interventional samples with
the observational one drawn from the same seed.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.special import expit

from .data import Dataset, EventType
from .errors import ConfigError, DegenerateDistribution
from .interventions import InterventionSpec

_CHUNK = 65536


@dataclass(frozen=True)
class HazardSpec:
    p_low: float
    p_low_tau: float = 0.0
    p_high: float = 0.0
    p_high_tau: float = 0.0
    support_index: int = 0

    def __post_init__(self):
        for a in (0, 1):
            for base, tau in ((self.p_low, self.p_low_tau), (self.p_high, self.p_high_tau)):
                p = base + a * tau
                if not 0 < p <= 1:
                    raise ConfigError(f"hazard {base} + {a}*{tau} = {p} outside (0, 1]")
        if self.support_index < 0:
            raise ConfigError("support_index must be >= 0")

    def __call__(self, x, a):
        """Hazard for covariate rows ``x`` (n, d) and arms ``a`` (scalar or (n,))."""
        x = np.atleast_2d(x)
        a = np.asarray(a, dtype=float)
        high = x[:, self.support_index] == 1
        return np.where(high, self.p_high + a * self.p_high_tau, self.p_low + a * self.p_low_tau)


@dataclass(frozen=True)
class DgpConfig:
    rho: float = 0.35
    hazard_main: HazardSpec = field(default_factory=lambda: HazardSpec(0.01, 0.0, 0.1, 0.0, 0))
    hazard_competing: HazardSpec = field(default_factory=lambda: HazardSpec(0.01, 0.0, 0.01, 0.0, 0))
    xi: float = 0.0
    propensity_index: int = 0
    horizon: int = 30
    n_train: int = 5000
    n_test: int = 10_000

    def __post_init__(self):
        _check_rho(self.rho)
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.n_train < 1 or self.n_test < 1:
            raise ConfigError("sample sizes must be >= 1")
        for idx in (self.propensity_index, self.hazard_main.support_index, self.hazard_competing.support_index):
            if idx not in (0, 1):
                raise ConfigError(f"covariate index {idx} out of range for 2 covariates")

    # -- oracle interface shared with the semi-synthetic truth ---------------

    def propensity(self, x):
        return propensity(self, x)

    def hazard_matrix(self, event, x, a):
        """True hazards as an ``(n, K)`` matrix (constant along k)."""
        spec = _spec_for(self, event)
        h = spec(x, a)
        return np.repeat(h[:, None], self.horizon, axis=1)

    # -- serialization ---------------------------------------------------------

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("hazard_main", "hazard_competing"):
            if key in d and isinstance(d[key], dict):
                d[key] = HazardSpec(**d[key])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _check_rho(rho):
    if not -0.5 < rho < 0.5:
        raise ConfigError(f"rho={rho} must lie in (-0.5, 0.5)")


def _spec_for(cfg, event):
    if event == EventType.MAIN:
        return cfg.hazard_main
    if event == EventType.COMPETING:
        return cfg.hazard_competing
    raise ValueError(f"no hazard for event type {event!r}")


# -- presets -------------------------------------------------------------------


def preset(setting: int, varying_value: float, **overrides) -> DgpConfig:
    """The four synthetic settings; ``varying_value`` is the swept parameter.

    1: confounding strength xi. 2: competing-event effect in the high-risk
    group. 3: baseline competing hazard of the high-risk group. 4: xi with a
    fixed competing-event side effect of 0.1 in the high-risk group.
    """
    v = float(varying_value)
    main = HazardSpec(0.01, 0.0, 0.1, 0.0, 0)
    if setting == 1:
        cfg = DgpConfig(hazard_main=main, hazard_competing=HazardSpec(0.01, 0.0, 0.01, 0.0, 0), xi=v)
    elif setting == 2:
        cfg = DgpConfig(hazard_main=main, hazard_competing=HazardSpec(0.01, 0.0, 0.01, v, 0), xi=0.0)
    elif setting == 3:
        cfg = DgpConfig(
            hazard_main=HazardSpec(0.01, 0.0, 0.1, -0.09, 0),
            hazard_competing=HazardSpec(0.01, 0.0, v, 0.0, 0),
            xi=0.0,
        )
    elif setting == 4:
        cfg = DgpConfig(hazard_main=main, hazard_competing=HazardSpec(0.01, 0.0, 0.01, 0.1, 0), xi=v)
    else:
        raise ConfigError(f"unknown setting {setting!r}; expected 1..4")
    return replace(cfg, **overrides) if overrides else cfg


# -- model pieces ----------------------------------------------------------------


def sample_covariates(n: int, rho: float, seed) -> np.ndarray:
    _check_rho(rho)
    rng = np.random.default_rng(seed)
    u = rng.random((n, 2))
    x1 = (u[:, 0] < 0.5).astype(float)
    x2 = (u[:, 1] < 0.5 - rho * (1 - 2 * x1)).astype(float)
    return np.column_stack([x1, x2])


def true_hazard(cfg: DgpConfig, event, k: int, x, a):
    """Hazard of ``event`` at step ``k``; the synthetic hazards ignore ``k``."""
    h = _spec_for(cfg, event)(x, a)
    return float(h[0]) if np.ndim(x) == 1 else h


def propensity(cfg: DgpConfig, x):
    """P(A=1 | X=x) = expit(xi * (x[S_A] - 0.5))."""
    xs = np.atleast_2d(x)
    p = expit(cfg.xi * (xs[:, cfg.propensity_index] - 0.5))
    return float(p[0]) if np.ndim(x) == 1 else p


def _draw_events(hazard_fn, x, a_main, a_comp, keep_competing, K, rng):
    """First-event times and types from per-step uniforms.

    ``hazard_fn(event, x_chunk, a_chunk)`` returns ``(m, K)`` hazard matrices.
    """
    n = len(x)
    t = np.full(n, K + 1, dtype=np.int64)
    e = np.zeros(n, dtype=np.int64)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        u = rng.random((hi - lo, K, 2))
        xs = x[lo:hi]
        h_y = hazard_fn(EventType.MAIN, xs, a_main[lo:hi])
        comp = np.zeros((hi - lo, K), dtype=bool)
        if keep_competing:
            comp = u[:, :, 0] < hazard_fn(EventType.COMPETING, xs, a_comp[lo:hi])
        main = ~comp & (u[:, :, 1] < h_y)
        any_event = comp | main
        hit = any_event.any(axis=1)
        first = any_event.argmax(axis=1)
        rows = np.flatnonzero(hit)
        t[lo + rows] = first[rows] + 1
        e[lo + rows] = np.where(comp[rows, first[rows]], EventType.COMPETING, EventType.MAIN)
    return t, e


def _streams(seed):
    """Covariate, treatment and event seeds; a 3-tuple is used as given."""
    if isinstance(seed, (tuple, list)):
        if len(seed) != 3:
            raise ValueError("expected (covariate, treatment, event) seeds")
        return tuple(seed)
    cov, treat, events = np.random.SeedSequence(seed).spawn(3)
    return cov, treat, events


def sample_observational(cfg: DgpConfig, seed, n: int | None = None) -> Dataset:
    n = cfg.n_train if n is None else n
    cov, treat, events = _streams(seed)
    x = sample_covariates(n, cfg.rho, cov)
    a = (np.random.default_rng(treat).random(n) < propensity(cfg, x)).astype(np.int64)
    t, e = _draw_events(cfg.hazard_matrix, x, a, a, True, cfg.horizon, np.random.default_rng(events))
    return Dataset(x, a, t, e, cfg.horizon)


def sample_interventional(cfg: DgpConfig, spec: InterventionSpec, seed, n: int | None = None) -> Dataset:
    """Sample under ``spec``; records carry ``A = spec.arm`` (``a_y`` for separable)."""
    n = cfg.n_train if n is None else n
    a_main, a_comp, keep = spec.resolve()
    cov, _, events = _streams(seed)
    x = sample_covariates(n, cfg.rho, cov)
    am = np.full(n, a_main, dtype=np.int64)
    ac = np.full(n, a_comp, dtype=np.int64)
    t, e = _draw_events(cfg.hazard_matrix, x, am, ac, keep, cfg.horizon, np.random.default_rng(events))
    return Dataset(x, am, t, e, cfg.horizon)


# -- exact oracles on the four covariate cells -------------------------------------

CELLS = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])


def cell_probabilities(rho: float) -> np.ndarray:
    """P(X = x) for the rows of ``CELLS``."""
    p_x2_given_0 = 0.5 - rho
    p_x2_given_1 = 0.5 + rho
    return 0.5 * np.array([1 - p_x2_given_0, p_x2_given_0, 1 - p_x2_given_1, p_x2_given_1])


def cell_index(x) -> np.ndarray:
    """Row index into ``CELLS`` for each covariate row."""
    x = np.atleast_2d(x)
    return (2 * x[:, 0] + x[:, 1]).astype(np.int64)


def _normalize(mass):
    total = mass.sum()
    if not total > 0:
        raise DegenerateDistribution("at-risk mass is zero in every covariate cell")
    return mass / total


def exact_at_risk_distribution(cfg: DgpConfig, spec: InterventionSpec, k: int) -> np.ndarray:
    """Interventional main-event at-risk law over ``CELLS`` at step ``k``."""
    if not 1 <= k <= cfg.horizon:
        raise ValueError(f"k={k} outside 1..{cfg.horizon}")
    a_main, a_comp, keep = spec.resolve()
    h_y = cfg.hazard_main(CELLS, a_main)
    surv = (1 - h_y) ** (k - 1)
    if keep:
        h_d = cfg.hazard_competing(CELLS, a_comp)
        surv = surv * (1 - h_d) ** k
    return _normalize(cell_probabilities(cfg.rho) * surv)


def observational_at_risk_distribution(cfg: DgpConfig, a: int, k: int) -> np.ndarray:
    """Observational main-event at-risk law P(X = x | at risk at k, A = a)."""
    if not 1 <= k <= cfg.horizon:
        raise ValueError(f"k={k} outside 1..{cfg.horizon}")
    pi1 = propensity(cfg, CELLS)
    pi_a = pi1 if a == 1 else 1 - pi1
    h_y = cfg.hazard_main(CELLS, a)
    h_d = cfg.hazard_competing(CELLS, a)
    return _normalize(cell_probabilities(cfg.rho) * pi_a * (1 - h_y) ** (k - 1) * (1 - h_d) ** k)


def exact_risk(cfg: DgpConfig, spec: InterventionSpec, x, k: int):
    """Cumulative incidence of the main event by ``k`` under ``spec``.

    Uses the geometric-series closed form available because the synthetic
    hazards are constant in time.
    """
    a_main, a_comp, keep = spec.resolve()
    h_y = cfg.hazard_main(x, a_main)
    h_d = cfg.hazard_competing(x, a_comp) if keep else np.zeros_like(h_y)
    # per-step main-event probability h_Y (1 - h_D), geometric in the all-cause survival s
    s = (1 - h_y) * (1 - h_d)
    one_minus_s = 1 - s
    with np.errstate(divide="ignore", invalid="ignore"):
        risk = np.where(one_minus_s > 0, h_y * (1 - h_d) * (1 - s**k) / one_minus_s, 0.0)
    return float(risk[0]) if np.ndim(x) == 1 else risk


class OracleGrid:
    """Hazard-grid view of the true hazards, usable wherever a fitted grid is."""

    def __init__(self, cfg: DgpConfig):
        self.cfg = cfg
        self.horizon = cfg.horizon

    def hazard_matrix(self, event, x, a):
        x = np.atleast_2d(x)
        return self.cfg.hazard_matrix(event, x, np.full(len(x), a))
