"""Interventions and the treatment effects defined through them.

Every intervention is reduced to a triple ``(a_main, a_competing,
keep_competing)``: the arm whose main-event hazard is used, the arm whose
competing-event hazard is used, and whether competing events happen at all.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError


def _check_arm(*arms):
    for a in arms:
        if a not in (0, 1):
            raise ConfigError(f"arm must be 0 or 1, got {a!r}")


@dataclass(frozen=True)
class Total:
    """do(A=a)."""

    a: int

    def __post_init__(self):
        _check_arm(self.a)

    def resolve(self):
        return self.a, self.a, True

    @property
    def arm(self):
        return self.a

    @property
    def label(self):
        return f"total({self.a})"


@dataclass(frozen=True)
class Direct:
    """do(A=a, D_1..D_K = 0): treatment fixed, competing events eliminated."""

    a: int

    def __post_init__(self):
        _check_arm(self.a)

    def resolve(self):
        return self.a, self.a, False

    @property
    def arm(self):
        return self.a

    @property
    def label(self):
        return f"direct({self.a})"


@dataclass(frozen=True)
class Separable:
    """do(A_Y=a_y, A_D=a_d): separate main- and competing-event treatment components."""

    a_y: int
    a_d: int

    def __post_init__(self):
        _check_arm(self.a_y, self.a_d)

    def resolve(self):
        return self.a_y, self.a_d, True

    @property
    def arm(self):
        # main-event hazards for this intervention are learned on arm a_y
        return self.a_y

    @property
    def label(self):
        return f"separable({self.a_y},{self.a_d})"


InterventionSpec = Total | Direct | Separable


def parse_intervention(text: str) -> InterventionSpec:
    """Inverse of ``.label``, e.g. ``"separable(1,0)"``."""
    s = text.strip().lower().replace(" ", "")
    try:
        name, args = s.rstrip(")").split("(")
        vals = [int(v) for v in args.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse intervention {text!r}") from None
    if name == "total" and len(vals) == 1:
        return Total(vals[0])
    if name == "direct" and len(vals) == 1:
        return Direct(vals[0])
    if name == "separable" and len(vals) == 2:
        return Separable(*vals)
    raise ConfigError(f"cannot parse intervention {text!r}")


@dataclass(frozen=True)
class TotalRiskDiff:
    name = "total"

    def arms(self):
        return {0: Total(0), 1: Total(1)}


@dataclass(frozen=True)
class DirectRiskDiff:
    name = "direct"

    def arms(self):
        return {0: Direct(0), 1: Direct(1)}


@dataclass(frozen=True)
class SeparableDirectRiskDiff:
    a_d: int = 0
    name = "separable_direct"

    def __post_init__(self):
        _check_arm(self.a_d)

    def arms(self):
        return {0: Separable(0, self.a_d), 1: Separable(1, self.a_d)}


@dataclass(frozen=True)
class SeparableIndirectRiskDiff:
    a_y: int = 0
    name = "separable_indirect"

    def __post_init__(self):
        _check_arm(self.a_y)

    def arms(self):
        # both contrasts use main hazards of arm a_y under different
        # competing regimes, which one per-arm grid cannot target at once
        raise ConfigError("the separable indirect effect has no single per-arm intervention target")


EffectKind = TotalRiskDiff | DirectRiskDiff | SeparableDirectRiskDiff | SeparableIndirectRiskDiff

EFFECTS = {
    "total": TotalRiskDiff(),
    "direct": DirectRiskDiff(),
    "separable_direct": SeparableDirectRiskDiff(0),
}


def parse_effect(text: str) -> EffectKind:
    """Names: ``total``, ``direct``, ``separable_direct[:a_d]``, ``separable_indirect[:a_y]``."""
    name, _, arg = text.strip().partition(":")
    if name == "total":
        return TotalRiskDiff()
    if name == "direct":
        return DirectRiskDiff()
    if name == "separable_direct":
        return SeparableDirectRiskDiff(int(arg) if arg else 0)
    if name == "separable_indirect":
        return SeparableIndirectRiskDiff(int(arg) if arg else 0)
    raise ConfigError(f"unknown effect {text!r}")
