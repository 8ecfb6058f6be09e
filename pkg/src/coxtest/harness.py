"""Monte Carlo level and power studies, limit-law checks and the drifted Brownian oracle.

Trial ``k`` of the ``j``-th parameter value always draws from the stream
``RngStream(master_seed, (j, k))``, so results do not depend on how trials are
split across worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import stats

from .engine import critical_values, run_test
from .empirical import empirical_curves
from .errors import DegenerateSampleError, ParameterError
from .normal import normal_cdf, normal_quantile
from .rng import RngStream, as_generator
from .simulate import CoxModel1, CoxModel2, ModelSpec

__all__ = [
    "McConfig",
    "McResult",
    "KsReport",
    "run_trials",
    "level_study",
    "power_curve",
    "limit_law_check",
    "drifted_sup_mc",
    "drifted_sup_samples",
    "drifted_sup_power",
    "CSV_FIELDS",
]

CSV_FIELDS = ("theta", "n", "alpha", "power_s1", "se_s1", "power_s2", "se_s2", "n_mc", "seed")


@dataclass(frozen=True)
class McConfig:
    model: ModelSpec
    n: int = 100
    n_mc: int = 10_000
    alpha: float = 0.05
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"n must be >= 2, got {self.n}")
        if self.n_mc < 1:
            raise ParameterError(f"n_mc must be >= 1, got {self.n_mc}")
        if not 0 < self.alpha < 1:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class McResult:
    reject_freq_s1: float
    reject_freq_s2: float
    se_s1: float
    se_s2: float
    degenerate_trials: int
    config: McConfig

    @property
    def valid_trials(self) -> int:
        return self.config.n_mc - self.degenerate_trials

    def row(self, theta=None) -> dict:
        """One CSV row; ``theta`` defaults to the model's effect parameter."""
        if theta is None:
            theta = getattr(self.config.model, "theta", getattr(self.config.model, "beta", ""))
        return {
            "theta": theta,
            "n": self.config.n,
            "alpha": self.config.alpha,
            "power_s1": self.reject_freq_s1,
            "se_s1": self.se_s1,
            "power_s2": self.reject_freq_s2,
            "se_s2": self.se_s2,
            "n_mc": self.config.n_mc,
            "seed": self.config.master_seed,
        }

    def as_dict(self) -> dict:
        out = asdict(self)
        cfg = out.pop("config")
        model = self.config.model
        cfg["model"] = {"name": type(model).__name__, **asdict(model)}
        out["config"] = cfg
        out["valid_trials"] = self.valid_trials
        return out


def _trial_block(model, n, master_seed, stream_prefix, start, stop):
    """Standardized statistics for trials ``start..stop-1``; NaN marks a degenerate trial."""
    out = np.full((stop - start, 2), np.nan)
    for row, k in enumerate(range(start, stop)):
        sample = model.sample(n, RngStream(master_seed, stream_prefix + (k,)))
        try:
            rep = run_test(empirical_curves(sample), 0.5)
        except DegenerateSampleError:
            continue
        out[row] = rep.t1, rep.t2
    return out


def run_trials(model: ModelSpec, n: int, n_mc: int, master_seed: int,
               stream_prefix: tuple = (0,), workers: int = 1) -> np.ndarray:
    """``(n_mc, 2)`` array of ``(t1, t2)`` per trial, in trial order."""
    if workers <= 1 or n_mc < 2:
        return _trial_block(model, n, master_seed, stream_prefix, 0, n_mc)
    edges = np.linspace(0, n_mc, min(workers, n_mc) + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_trial_block, model, n, master_seed, stream_prefix, int(a), int(b))
            for a, b in zip(edges[:-1], edges[1:])
        ]
        return np.concatenate([f.result() for f in futures])


def summarize(stats_: np.ndarray, cfg: McConfig) -> McResult:
    """Rejection frequencies over the non-degenerate trials."""
    crit1, crit2 = critical_values(cfg.n, cfg.alpha)
    ok = ~np.isnan(stats_[:, 0])
    valid = int(ok.sum())
    if valid:
        f1 = float(np.mean(stats_[ok, 0] >= crit1))
        f2 = float(np.mean(stats_[ok, 1] >= crit2))
        se1 = math.sqrt(f1 * (1 - f1) / valid)
        se2 = math.sqrt(f2 * (1 - f2) / valid)
    else:
        f1 = f2 = se1 = se2 = float("nan")
    return McResult(f1, f2, se1, se2, cfg.n_mc - valid, cfg)


def level_study(cfg: McConfig) -> McResult:
    """Empirical rejection frequencies of both tests over ``cfg.n_mc`` trials."""
    t = run_trials(cfg.model, cfg.n, cfg.n_mc, cfg.master_seed, (0,), cfg.workers)
    return summarize(t, cfg)


def power_curve(cfg: McConfig, theta_grid) -> list[McResult]:
    """One ``McResult`` per ``theta``; the ``j``-th grid value uses streams ``(seed, (j, k))``."""
    if not isinstance(cfg.model, (CoxModel1, CoxModel2)):
        raise ParameterError("power_curve needs a CoxModel1 or CoxModel2 template")
    results = []
    for j, theta in enumerate(theta_grid):
        c = replace(cfg, model=replace(cfg.model, theta=float(theta)))
        t = run_trials(c.model, c.n, c.n_mc, c.master_seed, (j,), c.workers)
        results.append(summarize(t, c))
    return results


@dataclass(frozen=True)
class KsReport:
    ks_t1: float
    ks_t2: float
    pvalue_t1: float
    pvalue_t2: float
    threshold: float
    n: int
    n_mc: int
    degenerate_trials: int
    asymptotic: bool

    @property
    def passed(self) -> bool | None:
        """``None`` in informational (pre-asymptotic) mode."""
        if not self.asymptotic:
            return None
        return self.ks_t1 < self.threshold and self.ks_t2 < self.threshold


def folded_normal2_cdf(x):
    """CDF of ``|N(0, 2)|``: ``2 Phi(x / sqrt2) - 1`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, 2.0 * normal_cdf(np.maximum(x, 0) / math.sqrt(2.0)) - 1.0, 0.0)


def normal4_cdf(x):
    """CDF of ``N(0, 4)``: ``Phi(x / 2)``."""
    return normal_cdf(np.asarray(x, dtype=float) / 2.0)


def limit_law_check(cfg: McConfig, threshold: float = 0.05, min_n: int = 100) -> KsReport:
    """KS distances of ``t1`` against ``|N(0,2)|`` and ``t2`` against ``N(0,4)``.

    Samples with ``n < min_n`` are reported without a verdict.
    """
    t = run_trials(cfg.model, cfg.n, cfg.n_mc, cfg.master_seed, (0,), cfg.workers)
    t = t[~np.isnan(t[:, 0])]
    k1 = stats.kstest(t[:, 0], folded_normal2_cdf)
    k2 = stats.kstest(t[:, 1], normal4_cdf)
    return KsReport(
        ks_t1=float(k1.statistic),
        ks_t2=float(k2.statistic),
        pvalue_t1=float(k1.pvalue),
        pvalue_t2=float(k2.pvalue),
        threshold=threshold,
        n=cfg.n,
        n_mc=cfg.n_mc,
        degenerate_trials=cfg.n_mc - len(t),
        asymptotic=cfg.n >= min_n,
    )


def drifted_sup_samples(drifts, horizon: float, n_paths: int, steps: int, rng,
                        chunk: int = 256) -> np.ndarray:
    """Grid maxima of ``B_s + mu * s`` on ``[0, horizon]`` for each drift ``mu``.

    All drifts share the same Brownian increments. Returns an array of shape
    ``(len(drifts), n_paths)``.
    """
    if n_paths < 1 or steps < 1:
        raise ParameterError("n_paths and steps must be >= 1")
    gen = as_generator(rng)
    drifts = np.atleast_1d(np.asarray(drifts, dtype=float))
    dt = horizon / steps
    grid = dt * np.arange(1, steps + 1)
    out = np.empty((drifts.size, n_paths))
    for start in range(0, n_paths, chunk):
        m = min(chunk, n_paths - start)
        path = np.cumsum(gen.standard_normal((m, steps)), axis=1)
        path *= math.sqrt(dt)
        for j, mu in enumerate(drifts):
            # B_0 = 0 is part of the grid, so the max is at least 0
            out[j, start:start + m] = np.maximum((path + mu * grid).max(axis=1), 0.0)
    return out


def drifted_sup_mc(x: float, lambda0: float, alpha: float, n_paths: int, steps: int, rng,
                   horizon: float = 1.0) -> float:
    """Monte Carlo estimate of the limiting power of the supremum test under the local alternative.

    Simulates ``sup_{s <= 2 l0^2 T^2} (B_s + x s / (2 l0^2 T))`` on a uniform
    grid and returns the frequency of reaching ``sqrt(2) l0 T q_{1-alpha/2}``.
    The grid maximum is biased low by ``O(sqrt(step))``.
    """
    x, alpha = np.atleast_1d(x), np.atleast_1d(alpha)
    est = drifted_sup_power(x, lambda0, alpha, n_paths, steps, rng, horizon)
    return float(est[0, 0])


def drifted_sup_power(xs, lambda0: float, alphas, n_paths: int, steps: int, rng,
                      horizon: float = 1.0) -> np.ndarray:
    """Vector form of ``drifted_sup_mc``: shape ``(len(xs), len(alphas))``, shared paths."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    span = 2.0 * lambda0 ** 2 * horizon ** 2
    drifts = xs / (2.0 * lambda0 ** 2 * horizon)
    sups = drifted_sup_samples(drifts, span, n_paths, steps, rng)
    levels = math.sqrt(2.0) * lambda0 * horizon * normal_quantile(1 - alphas / 2)
    return (sups[:, :, None] >= levels[None, None, :]).mean(axis=1)
