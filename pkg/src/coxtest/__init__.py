"""Nonparametric tests of the Poisson hypothesis for samples of Cox process paths."""

from .core import (
    StepFunction,
    Trajectory,
    TrajectorySet,
    concat_events,
    count_at,
    step_integral,
    step_sup,
    step_weighted_integral,
)
from .empirical import EmpiricalCurves, empirical_curves, i_hat
from .engine import (
    AnalyticPowerParams,
    TestReport,
    analytic_power_g1,
    analytic_power_g2,
    critical_values,
    power_table,
    run_test,
)
from .errors import (
    CoxTestError,
    ContractViolation,
    DataError,
    DegenerateSampleError,
    DomainError,
    InvalidSampleError,
    ParameterError,
)
from .normal import normal_cdf, normal_quantile, normal_sf
from .rng import RngStream

__version__ = "0.1.0"
