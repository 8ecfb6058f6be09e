"""Exact samplers for Poisson and Cox processes.

Two routes are provided for every model. The single-path samplers
(``sim_*`` and ``Model.sample_path``) follow the textbook sequential
constructions: unit-exponential arrivals pushed through the inverse
cumulative intensity, or Lewis-Shedler thinning. The batch samplers
(``Model.sample``) draw a whole sample at once from one generator using the
conditional order-statistics property of Poisson processes; they are what
the Monte Carlo harness runs. The test-suite checks the two routes against
each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Trajectory, TrajectorySet
from .errors import ContractViolation, ParameterError
from .rng import RngStream, as_generator

__all__ = [
    "HomPoisson",
    "Weibull",
    "CoxModel1",
    "CoxModel2",
    "LocalAlt",
    "ModelSpec",
    "make_model",
    "simulate_set",
    "sim_poisson_timechange",
    "sim_weibull",
    "sim_thinning",
    "sim_cox_model1",
    "sim_cox_model2",
    "sim_local_alt",
]

_BLOCK = 16


def _check_horizon(T):
    if not (np.isfinite(T) and T > 0):
        raise ParameterError(f"horizon must be a positive real, got {T!r}")


def sim_poisson_timechange(inverse_cumulative: Callable, T: float, rng) -> Trajectory:
    """Poisson path with cumulative intensity ``Lambda`` on ``(0, T]``.

    Jump times are ``Lambda^{-1}(S_k)`` for the partial sums ``S_k`` of unit
    exponentials, kept while they do not exceed ``T``. ``inverse_cumulative``
    must be vectorized and non-decreasing.
    """
    _check_horizon(T)
    gen = as_generator(rng)
    chunks = []
    level = 0.0
    last = 0.0
    block = _BLOCK
    while True:
        arrivals = level + np.cumsum(gen.standard_exponential(block))
        level = arrivals[-1]
        times = np.asarray(inverse_cumulative(arrivals), dtype=float)
        if np.any(np.isnan(times)) or times[0] < last or np.any(np.diff(times) < 0):
            raise ContractViolation("inverse cumulative intensity is not non-decreasing")
        stop = np.searchsorted(times, T, side="right")
        chunks.append(times[:stop])
        if stop < block:
            break
        last = times[-1]
        block *= 2
    return Trajectory(np.concatenate(chunks), T)


def sim_weibull(beta: float, T: float, rng) -> Trajectory:
    """Weibull process, intensity ``beta * t**(beta - 1)``, cumulative ``t**beta``."""
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta!r}")
    return sim_poisson_timechange(lambda u: u ** (1.0 / beta), T, rng)


def sim_thinning(rate_bound: float, rate_at: Callable[[float], float], T: float, rng) -> Trajectory:
    """Lewis-Shedler thinning of a rate ``rate_bound`` Poisson process.

    ``rate_at`` is called once per candidate, in increasing time order, so a
    stateful callback may carry its own random intensity path.
    """
    _check_horizon(T)
    if not (np.isfinite(rate_bound) and rate_bound > 0):
        raise ParameterError(f"rate_bound must be a positive real, got {rate_bound!r}")
    gen = as_generator(rng)
    events = []
    t = 0.0
    while True:
        t += gen.standard_exponential() / rate_bound
        if t > T:
            break
        rate = rate_at(t)
        if rate > rate_bound or rate < 0:
            raise ContractViolation(f"rate {rate} at t={t} outside [0, {rate_bound}]")
        if gen.random() < rate / rate_bound:
            events.append(t)
    return Trajectory(events, T)


def _arcsine(u):
    """Beta(1/2, 1/2) by inverse CDF."""
    return np.sin(0.5 * np.pi * u) ** 2


def sim_cox_model1(theta: float, T: float, rng) -> Trajectory:
    """Intensity ``exp(theta * Z * t)`` with ``Z ~ 2 + Beta(1/2, 1/2)``, by time change."""
    if theta < 0:
        raise ParameterError(f"theta must be non-negative, got {theta!r}")
    gen = as_generator(rng)
    z = 2.0 + _arcsine(gen.random())
    if theta == 0:
        return sim_poisson_timechange(lambda u: u, T, gen)
    c = theta * z
    return sim_poisson_timechange(lambda u: np.log1p(c * u) / c, T, gen)


def sim_cox_model2(theta: float, T: float, rng) -> Trajectory:
    """Intensity ``exp(theta * sin(B_t))`` for a standard Brownian motion ``B``.

    No time grid: the Brownian path is advanced only to the thinning
    candidates, and the bound ``exp(theta)`` is attained when ``sin(B_t) = 1``.
    """
    if theta < 0:
        raise ParameterError(f"theta must be non-negative, got {theta!r}")
    gen = as_generator(rng)
    state = [0.0, 0.0]  # time, Brownian value

    def rate_at(t):
        state[1] += math.sqrt(t - state[0]) * gen.standard_normal()
        state[0] = t
        return math.exp(theta * math.sin(state[1]))

    return sim_thinning(math.exp(theta), rate_at, T, gen)


def model2_acceptance(theta: float, brownian_value: float) -> float:
    """Thinning acceptance probability for Model 2 given the current path value."""
    return math.exp(theta * math.sin(brownian_value)) / math.exp(theta)


def _batch_timechange(totals, inverse, T, gen) -> TrajectorySet:
    """Vectorized sample: ``N_i(T) ~ Poisson(totals[i])``, times ``Lambda_i^{-1}`` of sorted uniforms."""
    counts = gen.poisson(totals)
    owner = np.repeat(np.arange(totals.size), counts)
    u = totals[owner] * (1.0 - gen.random(owner.size))  # in (0, Lambda_i(T)]
    times = np.minimum(inverse(u, owner), T)
    order = np.lexsort((times, owner))
    return TrajectorySet.from_flat(times[order], counts, T, validate=False)


@dataclass(frozen=True)
class HomPoisson:
    rate: float = 1.0
    horizon: float = 1.0

    def __post_init__(self):
        _check_horizon(self.horizon)
        if not self.rate > 0:
            raise ParameterError(f"rate must be positive, got {self.rate!r}")

    def sample_path(self, rng) -> Trajectory:
        return sim_poisson_timechange(lambda u: u / self.rate, self.horizon, rng)

    def sample(self, n: int, rng) -> TrajectorySet:
        gen = as_generator(rng)
        totals = np.full(n, self.rate * self.horizon)
        return _batch_timechange(totals, lambda u, _: u / self.rate, self.horizon, gen)


@dataclass(frozen=True)
class Weibull:
    beta: float = 1.0
    horizon: float = 1.0

    def __post_init__(self):
        _check_horizon(self.horizon)
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta!r}")

    def sample_path(self, rng) -> Trajectory:
        return sim_weibull(self.beta, self.horizon, rng)

    def sample(self, n: int, rng) -> TrajectorySet:
        gen = as_generator(rng)
        totals = np.full(n, self.horizon ** self.beta)
        return _batch_timechange(totals, lambda u, _: u ** (1.0 / self.beta), self.horizon, gen)


@dataclass(frozen=True)
class CoxModel1:
    """Random exponential-growth intensity ``exp(theta * Z * t)``."""

    theta: float = 0.0
    horizon: float = 1.0

    def __post_init__(self):
        _check_horizon(self.horizon)
        if self.theta < 0:
            raise ParameterError(f"theta must be non-negative, got {self.theta!r}")

    def sample_path(self, rng) -> Trajectory:
        return sim_cox_model1(self.theta, self.horizon, rng)

    def sample(self, n: int, rng) -> TrajectorySet:
        gen = as_generator(rng)
        T = self.horizon
        z = 2.0 + _arcsine(gen.random(n))
        if self.theta == 0:
            return _batch_timechange(np.full(n, T), lambda u, _: u, T, gen)
        c = self.theta * z
        totals = np.expm1(c * T) / c
        return _batch_timechange(totals, lambda u, own: np.log1p(c[own] * u) / c[own], T, gen)


@dataclass(frozen=True)
class CoxModel2:
    """Intensity ``exp(theta * sin(B_t))`` driven by a Brownian path."""

    theta: float = 0.0
    horizon: float = 1.0

    def __post_init__(self):
        _check_horizon(self.horizon)
        if self.theta < 0:
            raise ParameterError(f"theta must be non-negative, got {self.theta!r}")

    def sample_path(self, rng) -> Trajectory:
        return sim_cox_model2(self.theta, self.horizon, rng)

    def sample(self, n: int, rng) -> TrajectorySet:
        gen = as_generator(rng)
        T = self.horizon
        bound = math.exp(self.theta)
        counts = gen.poisson(bound * T, n)
        owner = np.repeat(np.arange(n), counts)
        cand = T * (1.0 - gen.random(owner.size))
        cand = cand[np.lexsort((cand, owner))]
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])[counts > 0]
        prev = np.empty_like(cand)
        prev[1:] = cand[:-1]
        prev[starts] = 0.0
        steps = np.sqrt(cand - prev) * gen.standard_normal(cand.size)
        csum = np.cumsum(steps)
        base = np.zeros(n)
        base[counts > 0] = csum[starts] - steps[starts]
        path = csum - base[owner]
        accept = gen.random(cand.size) < np.exp(self.theta * np.sin(path)) / bound
        kept = np.bincount(owner[accept], minlength=n)
        return TrajectorySet.from_flat(cand[accept], kept, T, validate=False)


@dataclass(frozen=True)
class LocalAlt:
    """Constant intensity ``lambda0 + d_n * Z`` per path, ``Z`` uniform with mean 0 and variance ``w**2``.

    Use ``LocalAlt.from_d(lambda0, w, d, n)`` to set ``d_n = sqrt(d / sqrt(n))``,
    so that ``sqrt(n) * d_n**2 == d``.
    """

    lambda0: float = 1.0
    w: float = 0.0
    d_n: float = 0.0
    horizon: float = 1.0

    def __post_init__(self):
        _check_horizon(self.horizon)
        if not self.lambda0 > 0 or self.w < 0 or self.d_n < 0:
            raise ParameterError("need lambda0 > 0, w >= 0 and d_n >= 0")
        if self.lambda0 - self.d_n * self.w * math.sqrt(3.0) < 0:
            raise ParameterError(
                f"intensity can go negative: lambda0 - d_n*w*sqrt(3) = "
                f"{self.lambda0 - self.d_n * self.w * math.sqrt(3.0):.6g} < 0"
            )

    @classmethod
    def from_d(cls, lambda0: float, w: float, d: float, n: int, horizon: float = 1.0) -> "LocalAlt":
        if d < 0 or n < 1:
            raise ParameterError("need d >= 0 and n >= 1")
        return cls(lambda0, w, math.sqrt(d / math.sqrt(n)), horizon)

    def _rates(self, u):
        return self.lambda0 + self.d_n * self.w * math.sqrt(3.0) * (2.0 * u - 1.0)

    def sample_path(self, rng) -> Trajectory:
        gen = as_generator(rng)
        rate = float(self._rates(gen.random()))
        if rate == 0:
            return Trajectory([], self.horizon)
        return sim_poisson_timechange(lambda u: u / rate, self.horizon, gen)

    def sample(self, n: int, rng) -> TrajectorySet:
        gen = as_generator(rng)
        rates = self._rates(gen.random(n))
        safe = np.where(rates > 0, rates, 1.0)
        return _batch_timechange(rates * self.horizon, lambda u, own: u / safe[own], self.horizon, gen)


ModelSpec = HomPoisson | Weibull | CoxModel1 | CoxModel2 | LocalAlt

_MODELS = {
    "hompoisson": HomPoisson,
    "weibull": Weibull,
    "cox1": CoxModel1,
    "cox2": CoxModel2,
    "localalt": LocalAlt,
}


def make_model(name: str, params: dict, horizon: float = 1.0) -> ModelSpec:
    """Build a model from its CLI name and keyword parameters.

    ``localalt`` takes either ``d_n`` directly or ``d`` together with ``n``.
    """
    try:
        cls = _MODELS[name]
    except KeyError:
        raise ParameterError(f"unknown model {name!r}; choose from {sorted(_MODELS)}") from None
    params = dict(params)
    try:
        if cls is LocalAlt and "d" in params:
            n = params.pop("n", None)
            if n is None:
                raise ParameterError("localalt with d= also needs n=")
            return LocalAlt.from_d(d=params.pop("d"), n=int(n), horizon=horizon, **params)
        return cls(horizon=horizon, **params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {name}: {exc}") from None


def simulate_set(model: ModelSpec, n: int, master_seed: int) -> TrajectorySet:
    """Sample ``n`` paths, path ``i`` drawn from its own stream ``(master_seed, i)``."""
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    return TrajectorySet([model.sample_path(RngStream(master_seed, i)) for i in range(n)])


def sim_local_alt(lambda0: float, w: float, d: float, n: int, T: float, rng) -> TrajectorySet:
    """``n`` paths under the local alternative with ``sqrt(n) * d_n**2 = d``."""
    return LocalAlt.from_d(lambda0, w, d, n, horizon=T).sample(n, rng)
