"""Empirical mean and variance processes of a trajectory sample."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import StepFunction, TrajectorySet, step_weighted_integral
from .errors import InvalidSampleError

__all__ = ["EmpiricalCurves", "empirical_curves", "i_hat"]


@dataclass(frozen=True)
class EmpiricalCurves:
    """Empirical mean ``m_hat``, variance ``sigma2_hat`` and ``sigma2_hat - m_hat``.

    All three share one breakpoint set: 0 followed by the distinct event
    times of the whole sample.
    """

    mean: StepFunction
    variance: StepFunction
    diff: StepFunction
    n: int
    horizon: float

    @property
    def mean_at_horizon(self) -> float:
        return float(self.mean.values[-1])


def _jump_moments(sample: TrajectorySet):
    """Distinct jump times with the running sums of ``N_t`` and ``N_t**2`` there.

    Every jump of a path currently at count ``c`` adds 1 to the first sum and
    ``2c + 1`` to the second, so both are exact integer cumulative sums over
    the time-ordered events.
    """
    times = sample.times
    if times.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return np.zeros(0), empty, empty
    prior = np.arange(times.size, dtype=np.int64) - sample.offsets[:-1].repeat(sample.counts)
    order = np.argsort(times, kind="stable")
    t_sorted = times[order]
    s1 = np.arange(1, times.size + 1, dtype=np.int64)
    s2 = np.cumsum(2 * prior[order] + 1)
    # value after the last of several simultaneous jumps
    last = np.append(np.flatnonzero(np.diff(t_sorted) != 0), times.size - 1)
    return t_sorted[last], s1[last], s2[last]


def empirical_curves(sample: TrajectorySet) -> EmpiricalCurves:
    """Exact ``m_hat``, ``sigma2_hat`` (divisor ``n - 1``) and their difference.

    Counts stay integral until the very end: ``n * sum(N**2) - (sum N)**2`` is
    formed in int64, so the variance has a single rounding step and the result
    does not depend on the order of the trajectories.
    """
    if not isinstance(sample, TrajectorySet):
        raise InvalidSampleError("expected a TrajectorySet")
    n = sample.n
    if n < 2:
        raise InvalidSampleError(f"need at least 2 trajectories, got {n}")
    jump_times, s1, s2 = _jump_moments(sample)
    # event times are > 0, so 0 is always a distinct leading breakpoint
    bp = np.concatenate([[0.0], jump_times])
    s1 = np.concatenate([[0], s1]).astype(np.int64)
    s2 = np.concatenate([[0], s2]).astype(np.int64)
    mean = s1 / n
    variance = (n * s2 - s1 * s1) / (n * (n - 1))
    diff = variance - mean
    horizon = sample.horizon
    return EmpiricalCurves(
        mean=StepFunction(bp, mean, horizon, _checked=False),
        variance=StepFunction(bp, variance, horizon, _checked=False),
        diff=StepFunction(bp, diff, horizon, _checked=False),
        n=n,
        horizon=horizon,
    )


def i_hat(sample: TrajectorySet | EmpiricalCurves) -> float:
    """Normalizer ``sqrt(int_0^T (T - t) m_hat(t)**2 dt)``; zero iff there are no events."""
    curves = sample if isinstance(sample, EmpiricalCurves) else empirical_curves(sample)
    return math.sqrt(step_weighted_integral(curves.mean))
