"""The supremum and integral statistics, their p-values and asymptotic local power."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import TrajectorySet, step_integral, step_sup
from .empirical import EmpiricalCurves, empirical_curves, i_hat
from .errors import DegenerateSampleError, DomainError, ParameterError
from .normal import log_normal_sf, normal_quantile, normal_sf

__all__ = [
    "TestReport",
    "AnalyticPowerParams",
    "run_test",
    "critical_values",
    "analytic_power_g1",
    "analytic_power_g2",
    "power_table",
]

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class TestReport:
    """Outcome of both tests on one sample.

    ``t1 = sqrt(n) * s1 / m_hat_T`` is asymptotically ``|N(0, 2)|`` and
    ``t2 = sqrt(n) * s2 / i_hat`` asymptotically ``N(0, 4)`` under the Poisson null.
    """

    __test__ = False  # not a pytest class

    s1: float
    s2: float
    m_hat_T: float
    i_hat: float
    t1: float
    t2: float
    p1: float
    p2: float
    alpha: float
    reject1: bool
    reject2: bool
    n: int

    def as_dict(self) -> dict:
        return asdict(self)


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def critical_values(n: int, alpha: float) -> tuple[float, float]:
    """Thresholds on ``t1`` and ``t2``: ``sqrt(2) q_{1-alpha/2}`` and ``2 q_{1-alpha}``.

    ``n`` is accepted for symmetry with the unstandardized regions; the
    standardized thresholds do not depend on it.
    """
    _check_alpha(alpha)
    return SQRT2 * normal_quantile(1 - alpha / 2), 2.0 * normal_quantile(1 - alpha)


def run_test(sample: TrajectorySet | EmpiricalCurves, alpha: float = 0.05) -> TestReport:
    """Run the supremum and integral tests of the Poisson hypothesis at level ``alpha``.

    Decisions use the threshold form (ties reject); p-values come from the
    limiting laws and agree with the decisions away from the boundary.
    """
    _check_alpha(alpha)
    curves = sample if isinstance(sample, EmpiricalCurves) else empirical_curves(sample)
    n = curves.n
    m_T = curves.mean_at_horizon
    norm2 = i_hat(curves)
    if m_T <= 0 or norm2 <= 0:
        raise DegenerateSampleError("sample has no events; both normalizers vanish")

    s1 = step_sup(curves.diff)
    s2 = step_integral(curves.diff)
    root_n = math.sqrt(n)
    t1 = root_n * s1 / m_T
    t2 = root_n * s2 / norm2
    crit1, crit2 = critical_values(n, alpha)
    p1 = min(max(2.0 * normal_sf(t1 / SQRT2), 0.0), 1.0)
    p2 = normal_sf(t2 / 2.0)
    return TestReport(
        s1=s1,
        s2=s2,
        m_hat_T=m_T,
        i_hat=norm2,
        t1=t1,
        t2=t2,
        p1=p1,
        p2=p2,
        alpha=float(alpha),
        reject1=bool(t1 >= crit1),
        reject2=bool(t2 >= crit2),
        n=n,
    )


@dataclass(frozen=True)
class AnalyticPowerParams:
    """Constant baseline ``lambda0`` perturbed by a random constant of variance ``w2``.

    ``d`` is the limit of ``sqrt(n) d_n**2``; the power depends on these only
    through ``x = d * w2 * horizon``.
    """

    lambda0: float = 1.0
    w2: float = 0.0
    d: float = 0.0
    horizon: float = 1.0
    alpha: float = 0.05

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ParameterError("lambda0 must be positive")
        if self.w2 < 0 or self.d < 0 or not self.horizon > 0:
            raise ParameterError("w2 and d must be non-negative and horizon positive")
        if not 0 < self.alpha < 1:
            raise ParameterError("alpha must lie in (0, 1)")

    @classmethod
    def from_x(cls, x: float, lambda0: float = 1.0, alpha: float = 0.05) -> "AnalyticPowerParams":
        return cls(lambda0=lambda0, w2=1.0, d=float(x), horizon=1.0, alpha=alpha)

    @property
    def x(self) -> float:
        return self.d * self.w2 * self.horizon


def analytic_power_g1(p: AnalyticPowerParams) -> float:
    """Limiting rejection probability of the supremum test.

    Crossing probability of level ``sqrt(2) q`` by a drifted Brownian motion,
    written as ``exp(sqrt2 x q / l0) (1 - Phi(q + x/(sqrt2 l0))) + 1 - Phi(q - x/(sqrt2 l0))``.
    """
    if p.x == 0:
        return p.alpha
    q = normal_quantile(1 - p.alpha / 2)
    shift = p.x / (SQRT2 * p.lambda0)
    # exp(a) * sf(b) in log space; a grows linearly in x
    reflected = math.exp(SQRT2 * p.x * q / p.lambda0 + log_normal_sf(q + shift))
    return min(reflected + normal_sf(q - shift), 1.0)


def analytic_power_g2(p: AnalyticPowerParams) -> float:
    """Limiting rejection probability of the integral test, ``1 - Phi(q_{1-alpha} - x/(sqrt3 l0))``."""
    if p.x == 0:
        return p.alpha
    q = normal_quantile(1 - p.alpha)
    return normal_sf(q - p.x / (SQRT3 * p.lambda0))


def power_table(x_grid, lambda0: float = 1.0, alpha: float = 0.05) -> np.ndarray:
    """Rows ``(x, g1, g2)`` over a grid of ``x`` values."""
    rows = []
    for x in x_grid:
        prm = AnalyticPowerParams.from_x(x, lambda0=lambda0, alpha=alpha)
        rows.append((float(x), analytic_power_g1(prm), analytic_power_g2(prm)))
    return np.array(rows, dtype=float).reshape(-1, 3)
