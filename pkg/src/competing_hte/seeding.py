"""Deterministic seed derivation for replicated experiments.

``seed_for(base_seed, rep, role)`` feeds the entropy tuple
``(base_seed, rep, role code)`` to :class:`numpy.random.SeedSequence` and
returns its first 64 bits of generated state. Distinct tuples give
statistically independent streams; the mapping is stable across platforms.
"""
from __future__ import annotations

from enum import IntEnum

import numpy as np


class Role(IntEnum):
    COVARIATES = 1
    TREATMENT = 2
    EVENTS = 3
    TEST = 4
    COUNTERFACTUAL = 5
    SPLIT = 6


def seed_for(base_seed: int, rep: int, role: Role) -> int:
    if base_seed < 0 or rep < 0:
        raise ValueError("base_seed and rep must be non-negative")
    state = np.random.SeedSequence([int(base_seed), int(rep), int(Role(role))]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def observational_seeds(base_seed: int, rep: int):
    """Seeds for the covariate, treatment and event draws of one replication."""
    return tuple(seed_for(base_seed, rep, r) for r in (Role.COVARIATES, Role.TREATMENT, Role.EVENTS))
