"""Trajectories, trajectory samples and exact right-continuous step functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InvalidSampleError

__all__ = [
    "Trajectory",
    "TrajectorySet",
    "StepFunction",
    "count_at",
    "step_sup",
    "step_integral",
    "step_weighted_integral",
    "concat_events",
]


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One observed counting path: its sorted jump times on ``(0, horizon]``."""

    events: np.ndarray
    horizon: float

    def __post_init__(self):
        horizon = float(self.horizon)
        if not np.isfinite(horizon) or horizon <= 0:
            raise DomainError(f"horizon must be a positive real, got {self.horizon!r}")
        events = _frozen(self.events).ravel()
        if events.size:
            if not np.all(np.isfinite(events)):
                raise DomainError("event times must be finite")
            if np.any(np.diff(events) < 0):
                raise DomainError("event times must be sorted non-decreasing")
            if events[0] <= 0 or events[-1] > horizon:
                raise DomainError(f"event times must lie in (0, {horizon}]")
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "horizon", horizon)

    def __len__(self) -> int:
        return self.events.size

    @property
    def has_ties(self) -> bool:
        """True when two jumps share a time stamp (each still counts as a jump)."""
        return bool(self.events.size > 1 and np.any(np.diff(self.events) == 0))

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.horizon == other.horizon and np.array_equal(self.events, other.events)

    def __repr__(self):
        return f"Trajectory(n_events={len(self)}, horizon={self.horizon})"


def count_at(traj: Trajectory, t: float) -> int:
    """Number of events in ``[0, t]``; a jump is counted at its own time."""
    if not 0 <= t <= traj.horizon:
        raise DomainError(f"t={t} outside [0, {traj.horizon}]")
    return int(np.searchsorted(traj.events, t, side="right"))


class TrajectorySet:
    """A sample of ``n >= 2`` trajectories observed on a common horizon.

    Events are stored flat (CSR layout): ``times[offsets[i]:offsets[i+1]]`` are
    the sorted jump times of trajectory ``i``. This keeps Monte Carlo trials
    cheap since no per-path objects are created unless asked for.
    """

    __slots__ = ("times", "offsets", "horizon")

    def __init__(self, trajectories: Sequence[Trajectory], horizon: float | None = None):
        trajectories = list(trajectories)
        if horizon is None:
            if not trajectories:
                raise InvalidSampleError("cannot infer the horizon of an empty sample")
            horizon = trajectories[0].horizon
        for k, tr in enumerate(trajectories):
            if tr.horizon != float(horizon):
                raise InvalidSampleError(
                    f"trajectory {k} has horizon {tr.horizon}, expected {float(horizon)}"
                )
        counts = [len(tr) for tr in trajectories]
        times = np.concatenate([tr.events for tr in trajectories]) if trajectories else []
        self._init(times, np.concatenate([[0], np.cumsum(counts, dtype=np.int64)]), horizon)

    @classmethod
    def from_flat(cls, times, counts, horizon: float, validate: bool = True) -> "TrajectorySet":
        """Build from concatenated per-path sorted times and per-path event counts."""
        obj = cls.__new__(cls)
        counts = np.asarray(counts, dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(counts)])
        obj._init(times, offsets, horizon, validate=validate)
        return obj

    def _init(self, times, offsets, horizon, validate=True):
        horizon = float(horizon)
        if not np.isfinite(horizon) or horizon <= 0:
            raise DomainError(f"horizon must be a positive real, got {horizon!r}")
        times = _frozen(times)
        offsets = _frozen(offsets, dtype=np.int64)
        n = offsets.size - 1
        if n < 2:
            raise InvalidSampleError(f"need at least 2 trajectories, got {n}")
        if validate:
            if offsets[-1] != times.size or np.any(np.diff(offsets) < 0):
                raise InvalidSampleError("offsets do not match the event array")
            if times.size:
                if not np.all(np.isfinite(times)) or times.min() <= 0 or times.max() > horizon:
                    raise InvalidSampleError(f"event times must lie in (0, {horizon}]")
                # decreasing steps are only allowed where a new trajectory starts
                drops = np.flatnonzero(np.diff(times) < 0) + 1
                if not np.all(np.isin(drops, offsets)):
                    raise InvalidSampleError("event times must be sorted within each trajectory")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "horizon", horizon)

    def __setattr__(self, name, value):
        raise AttributeError("TrajectorySet is immutable")

    def __reduce__(self):
        return (TrajectorySet.from_flat, (self.times, self.counts, self.horizon, False))

    @property
    def n(self) -> int:
        return self.offsets.size - 1

    def __len__(self) -> int:
        return self.n

    @property
    def counts(self) -> np.ndarray:
        """Total number of events per trajectory, ``N_T``."""
        return np.diff(self.offsets)

    @property
    def owners(self) -> np.ndarray:
        """Trajectory index of every entry of ``times``."""
        return np.repeat(np.arange(self.n), self.counts)

    @property
    def total_events(self) -> int:
        return int(self.times.size)

    def __getitem__(self, i: int) -> Trajectory:
        i = range(self.n)[i]
        return Trajectory(self.times[self.offsets[i]:self.offsets[i + 1]], self.horizon)

    def __iter__(self):
        return (self[i] for i in range(self.n))

    @property
    def trajectories(self) -> list[Trajectory]:
        return list(self)

    def counts_at(self, t: float) -> np.ndarray:
        """Vector of ``N_t`` over all trajectories."""
        if not 0 <= t <= self.horizon:
            raise DomainError(f"t={t} outside [0, {self.horizon}]")
        below = np.concatenate([[0], np.cumsum(self.times <= t)])
        return below[self.offsets[1:]] - below[self.offsets[:-1]]

    def __eq__(self, other):
        if not isinstance(other, TrajectorySet):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.times, other.times)
        )

    def __repr__(self):
        return f"TrajectorySet(n={self.n}, events={self.total_events}, horizon={self.horizon})"


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-continuous piecewise-constant function on ``[0, horizon]``.

    Equals ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])`` and
    ``values[-1]`` on ``[breakpoints[-1], horizon]``. ``breakpoints[0]`` is 0.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    horizon: float
    _checked: bool = field(default=True, repr=False)

    def __post_init__(self):
        bp = _frozen(self.breakpoints)
        vals = _frozen(self.values)
        horizon = float(self.horizon)
        if self._checked:
            if bp.ndim != 1 or bp.size == 0 or bp.shape != vals.shape:
                raise DomainError("breakpoints and values must be non-empty 1-d arrays of equal length")
            if bp[0] != 0:
                raise DomainError("first breakpoint must be 0")
            if np.any(np.diff(bp) <= 0) or bp[-1] > horizon:
                raise DomainError("breakpoints must be strictly increasing within [0, horizon]")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "horizon", horizon)

    @classmethod
    def constant(cls, value: float, horizon: float) -> "StepFunction":
        return cls([0.0], [value], horizon)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > self.horizon)):
            raise DomainError(f"evaluation outside [0, {self.horizon}]")
        out = self.values[np.searchsorted(self.breakpoints, t, side="right") - 1]
        return float(out) if out.ndim == 0 else out

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.append(self.breakpoints, self.horizon))

    def refine(self, breakpoints) -> "StepFunction":
        """Same function expressed on a finer breakpoint set (must contain ours)."""
        bp = np.asarray(breakpoints, dtype=float)
        return StepFunction(bp, self(bp), self.horizon)

    def _binary(self, other, op):
        if isinstance(other, StepFunction):
            if other.horizon != self.horizon:
                raise DomainError("step functions live on different horizons")
            bp = np.union1d(self.breakpoints, other.breakpoints)
            return StepFunction(bp, op(self(bp), other(bp)), self.horizon)
        return StepFunction(self.breakpoints, op(self.values, float(other)), self.horizon)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return StepFunction(self.breakpoints, -self.values, self.horizon)

    def sup(self) -> float:
        return step_sup(self)

    def integral(self) -> float:
        return step_integral(self)

    def __repr__(self):
        return f"StepFunction(pieces={self.values.size}, horizon={self.horizon})"


def step_sup(f: StepFunction) -> float:
    """Exact supremum on ``[0, T]``: every stored piece has positive or closed length."""
    return float(np.max(f.values))


def step_integral(f: StepFunction) -> float:
    """Exact ``int_0^T f(t) dt``."""
    return float(np.dot(f.values, f.widths))


def step_weighted_integral(f: StepFunction) -> float:
    """Exact ``int_0^T (T - t) f(t)^2 dt``."""
    lo = f.breakpoints
    hi = np.append(lo[1:], f.horizon)
    # (T-lo)^2 - (T-hi)^2 factored to avoid cancellation
    weights = 0.5 * (hi - lo) * ((f.horizon - lo) + (f.horizon - hi))
    return float(np.dot(f.values * f.values, weights))


def concat_events(trajectories: Iterable[Sequence[float]], horizon: float) -> TrajectorySet:
    """Convenience constructor from plain lists of event times."""
    return TrajectorySet([Trajectory(np.sort(np.asarray(ev, dtype=float)), horizon) for ev in trajectories])
