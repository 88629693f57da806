"""Observational time-to-event data with competing events.

Data are stored in short format: one row per unit with covariates ``x``,
treatment ``a``, event time ``t`` and event type ``e``. Timesteps are
1-based (``1..K``); a unit that is event-free through the horizon has
``t = K + 1`` and ``e = EventType.NONE``.

Within a timestep the competing event is checked before the main event, so a
unit with both indicators switching on at the same step is recorded as a
competing event.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DataError, MalformedTrajectory


class EventType(IntEnum):
    NONE = 0
    MAIN = 1
    COMPETING = 2


_CSV_EVENT = {"Y": EventType.MAIN, "D": EventType.COMPETING, "none": EventType.NONE}
_EVENT_CSV = {v: k for k, v in _CSV_EVENT.items()}


class EventRecord(NamedTuple):
    x: np.ndarray
    a: int
    t: int
    e: EventType


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Short-format sample ``(X, A, T, E)`` over horizon ``K``.

    Arrays are copied and made read-only on construction. Use :func:`validate`
    to check the invariants; the constructor only checks shapes.
    """

    x: np.ndarray
    a: np.ndarray
    t: np.ndarray
    e: np.ndarray
    horizon: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1) if len(x) else x.reshape(0, 0)
        n = x.shape[0]
        a = np.asarray(self.a, dtype=np.int64).reshape(-1)
        t = np.asarray(self.t, dtype=np.int64).reshape(-1)
        e = np.asarray(self.e, dtype=np.int64).reshape(-1)
        if not (len(a) == len(t) == len(e) == n):
            raise DataError(f"length mismatch: x={n}, a={len(a)}, t={len(t)}, e={len(e)}")
        if int(self.horizon) < 1:
            raise DataError("horizon must be >= 1")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "t", _frozen(t))
        object.__setattr__(self, "e", _frozen(e))
        object.__setattr__(self, "horizon", int(self.horizon))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.e, other.e)
        )

    def records(self) -> Iterator[EventRecord]:
        for i in range(self.n):
            yield EventRecord(self.x[i], int(self.a[i]), int(self.t[i]), EventType(self.e[i]))

    @classmethod
    def from_records(cls, records, horizon: int, dim: int | None = None) -> "Dataset":
        records = list(records)
        if not records:
            return cls(np.zeros((0, dim or 0)), [], [], [], horizon)
        x = np.vstack([np.atleast_1d(np.asarray(r[0], dtype=float)) for r in records])
        return cls(
            x,
            [r[1] for r in records],
            [r[2] for r in records],
            [int(r[3]) for r in records],
            horizon,
        )

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.x[idx], self.a[idx], self.t[idx], self.e[idx], self.horizon)

    @staticmethod
    def concat(parts) -> "Dataset":
        parts = list(parts)
        horizons = {p.horizon for p in parts}
        if len(horizons) != 1:
            raise DataError("cannot concatenate datasets with different horizons")
        return Dataset(
            np.vstack([p.x for p in parts]),
            np.concatenate([p.a for p in parts]),
            np.concatenate([p.t for p in parts]),
            np.concatenate([p.e for p in parts]),
            horizons.pop(),
        )


@dataclass(frozen=True, eq=False)
class AtRiskSample:
    """Units at risk of ``event`` at timestep ``k`` in arm ``a``."""

    indices: np.ndarray
    labels: np.ndarray
    k: int
    a: int
    event: EventType

    def __len__(self):
        return len(self.indices)


# -- long <-> short --------------------------------------------------------


def _first_one(ind):
    """1-based index of the first 1 per row, or 0 when the row is all zero."""
    hit = ind.any(axis=1)
    return np.where(hit, ind.argmax(axis=1) + 1, 0)


def from_long(main, competing, x, a) -> Dataset:
    """Convert ``(n, K)`` indicator histories into a short-format Dataset.

    ``main[i, k-1]`` is Y_k and ``competing[i, k-1]`` is D_k for unit ``i``.
    Both must be monotone ("by time k" indicators).
    """
    y = np.asarray(main).astype(bool)
    d = np.asarray(competing).astype(bool)
    if y.ndim != 2 or y.shape != d.shape:
        raise DataError("main and competing histories must be (n, K) arrays of equal shape")
    n, K = y.shape
    if (np.diff(y.astype(np.int8), axis=1) < 0).any() or (np.diff(d.astype(np.int8), axis=1) < 0).any():
        raise MalformedTrajectory("indicator sequences must be monotone (once 1, stays 1)")
    ty = _first_one(y)
    td = _first_one(d)
    both = (ty > 0) & (td > 0)
    if (both & (ty != td)).any():
        bad = np.flatnonzero(both & (ty != td))[0]
        raise MalformedTrajectory(f"unit {bad}: main and competing events both occur at different steps")

    t = np.full(n, K + 1, dtype=np.int64)
    e = np.full(n, int(EventType.NONE), dtype=np.int64)
    # D_k precedes Y_k: competing wins a same-step tie
    has_y = ty > 0
    t[has_y] = ty[has_y]
    e[has_y] = EventType.MAIN
    has_d = td > 0
    t[has_d] = td[has_d]
    e[has_d] = EventType.COMPETING
    return Dataset(np.asarray(x, dtype=float).reshape(n, -1), a, t, e, K)


def to_long(ds: Dataset):
    """Inverse of :func:`from_long`; returns ``(main, competing)`` int arrays."""
    steps = np.arange(1, ds.horizon + 1)
    reached = steps[None, :] >= ds.t[:, None]
    main = (reached & (ds.e == EventType.MAIN)[:, None]).astype(np.int8)
    competing = (reached & (ds.e == EventType.COMPETING)[:, None]).astype(np.int8)
    return main, competing


# -- at-risk sets ------------------------------------------------------------


def _check_k(ds, k):
    if not 1 <= k <= ds.horizon:
        raise ValueError(f"timestep k={k} outside 1..{ds.horizon}")


def competing_at_risk(ds: Dataset, k: int, a: int) -> AtRiskSample:
    """Units in arm ``a`` with no event of either type through ``k - 1``."""
    _check_k(ds, k)
    mask = (ds.t >= k) & (ds.a == a)
    idx = np.flatnonzero(mask)
    labels = ((ds.t[idx] == k) & (ds.e[idx] == EventType.COMPETING)).astype(np.int8)
    return AtRiskSample(idx, labels, k, a, EventType.COMPETING)


def main_at_risk(ds: Dataset, k: int, a: int) -> AtRiskSample:
    """Units in arm ``a`` with no main event before ``k`` and no competing event up to and including ``k``."""
    _check_k(ds, k)
    event_at_k = ds.t == k
    mask = (ds.a == a) & ((ds.t > k) | (event_at_k & (ds.e == EventType.MAIN)))
    idx = np.flatnonzero(mask)
    labels = (ds.t[idx] == k).astype(np.int8)
    return AtRiskSample(idx, labels, k, a, EventType.MAIN)


# -- validation and CSV ----------------------------------------------------------


class Violation(NamedTuple):
    code: str
    index: int
    message: str


def validate(ds: Dataset) -> list[Violation]:
    out = []
    K = ds.horizon
    for i in np.flatnonzero((ds.t < 1) | (ds.t > K + 1)):
        out.append(Violation("OutOfRangeTime", int(i), f"t={ds.t[i]} not in 1..{K + 1}"))
    for i in np.flatnonzero(~np.isin(ds.a, (0, 1))):
        out.append(Violation("InvalidTreatment", int(i), f"a={ds.a[i]}"))
    for i in np.flatnonzero(~np.isin(ds.e, [int(v) for v in EventType])):
        out.append(Violation("InvalidEventType", int(i), f"e={ds.e[i]}"))
    in_range = (ds.t >= 1) & (ds.t <= K + 1)
    free = ds.t == K + 1
    bad = in_range & (free != (ds.e == EventType.NONE))
    for i in np.flatnonzero(bad):
        out.append(Violation("InconsistentEventFlag", int(i), f"t={ds.t[i]}, e={ds.e[i]}"))
    if not np.isfinite(ds.x).all():
        out.append(Violation("NonFiniteCovariate", -1, "covariates contain NaN or inf"))
    return out


def write_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j}" for j in range(ds.dim)] + ["a", "t", "e"])
        for i in range(ds.n):
            w.writerow([repr(float(v)) for v in ds.x[i]] + [int(ds.a[i]), int(ds.t[i]), _EVENT_CSV[EventType(ds.e[i])]])


def read_csv(path, horizon: int) -> Dataset:
    """Strict reader for the ``x0,...,x{d-1},a,t,e`` format."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    d = len(header) - 3
    expected = [f"x{j}" for j in range(d)] + ["a", "t", "e"]
    if d < 1 or header != expected:
        raise DataError(f"{path}: header must be {','.join(expected) if d >= 1 else 'x0,...,a,t,e'}")
    x, a, t, e = [], [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header) or any(c.strip() == "" for c in row):
            raise DataError(f"{path}:{lineno}: expected {len(header)} non-empty fields")
        try:
            x.append([float(c) for c in row[:d]])
            a.append(int(row[d]))
            t.append(int(row[d + 1]))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
        code = row[d + 2].strip()
        if code not in _CSV_EVENT:
            raise DataError(f"{path}:{lineno}: event must be one of Y, D, none (got {code!r})")
        e.append(int(_CSV_EVENT[code]))
    ds = Dataset(np.asarray(x, dtype=float).reshape(len(x), d), a, t, e, horizon)
    problems = validate(ds)
    if problems:
        v = problems[0]
        raise DataError(f"{path}: row {v.index + 2}: {v.code} ({v.message})")
    return ds
