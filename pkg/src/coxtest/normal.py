"""Standard normal distribution function, tail and quantile."""

from __future__ import annotations

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = ["normal_cdf", "normal_sf", "normal_quantile", "log_normal_sf"]


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def normal_cdf(x):
    """``Phi(x)``; accepts scalars or arrays."""
    return _out(special.ndtr(x))


def normal_sf(x):
    """Upper tail ``1 - Phi(x)`` without cancellation for large ``x``."""
    return _out(special.ndtr(-np.asarray(x, dtype=float)))


def log_normal_sf(x):
    """``log(1 - Phi(x))``, finite far into the tail."""
    return _out(special.log_ndtr(-np.asarray(x, dtype=float)))


def normal_quantile(beta):
    """``Phi^{-1}(beta)`` for ``0 < beta < 1``."""
    b = np.asarray(beta, dtype=float)
    if np.any(~((b > 0) & (b < 1))):
        raise DomainError(f"quantile level must lie in (0, 1), got {beta!r}")
    return _out(special.ndtri(b))
