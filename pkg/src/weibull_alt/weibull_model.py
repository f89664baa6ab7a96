"""Two-parameter Weibull kernel and the linear stress-translation functions.

All functions accept scalars or numpy arrays and return the same shape.  The
survival term ``exp(-(x/lam)**alpha)`` is evaluated through ``log(x/lam)`` so
that large shapes (the illustration data give alpha near 25) never overflow
the power before the exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeibullParams",
    "StressPoint",
    "StressCoefficients",
    "pdf",
    "cdf",
    "survival",
    "hazard",
    "quantile",
    "cumulative_hazard",
    "from_cumulative_hazard",
    "stf_eval",
    "stf_parameter",
]


@dataclass(frozen=True)
class WeibullParams:
    """Shape ``alpha`` and scale ``lam`` of a Weibull lifetime law."""

    alpha: float
    lam: float

    def __post_init__(self):
        for name in ("alpha", "lam"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"Weibull {name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class StressPoint:
    """Temperature in Kelvin and voltage in Volts."""

    temperature: float
    voltage: float

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise ValueError(f"temperature must be positive, got {self.temperature!r}")
        if not (math.isfinite(self.voltage) and self.voltage > 0):
            raise ValueError(f"voltage must be positive, got {self.voltage!r}")


@dataclass(frozen=True)
class StressCoefficients:
    """Coefficients of ``intercept + inv_temp / T + log_volt * ln V``."""

    intercept: float
    inv_temp: float
    log_volt: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise ValueError(f"stress coefficients must be finite, got {self.as_tuple()!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.intercept, self.inv_temp, self.log_volt)

    def __call__(self, s: StressPoint) -> float:
        return stf_eval(self, s)


def _check_positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("Weibull functions are defined for x > 0 only")
    return x


def _log_ratio_power(x, p: WeibullParams):
    # (x/lam)**alpha computed as exp(alpha * log(x/lam))
    return np.exp(p.alpha * (np.log(x) - math.log(p.lam)))


def _out(v):
    return v.item() if np.ndim(v) == 0 else v


def pdf(x, p: WeibullParams):
    """Density ``(alpha/lam) (x/lam)^(alpha-1) exp(-(x/lam)^alpha)``."""
    x = _check_positive(x)
    logz = np.log(x) - math.log(p.lam)
    logf = math.log(p.alpha / p.lam) + (p.alpha - 1.0) * logz - np.exp(p.alpha * logz)
    return _out(np.exp(logf))


def cdf(x, p: WeibullParams):
    x = _check_positive(x)
    return _out(-np.expm1(-_log_ratio_power(x, p)))


def survival(x, p: WeibullParams):
    x = _check_positive(x)
    return _out(np.exp(-_log_ratio_power(x, p)))


def cumulative_hazard(x, p: WeibullParams):
    """``(x/lam)^alpha``, i.e. ``-log survival(x)``."""
    x = _check_positive(x)
    return _out(_log_ratio_power(x, p))


def hazard(x, p: WeibullParams):
    """Hazard rate ``alpha x^(alpha-1) / lam^alpha``."""
    x = _check_positive(x)
    logh = math.log(p.alpha) + (p.alpha - 1.0) * np.log(x) - p.alpha * math.log(p.lam)
    return _out(np.exp(logh))


def quantile(u, p: WeibullParams):
    """Inverse CDF ``lam (-log(1-u))^(1/alpha)`` for ``0 < u < 1``."""
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise ValueError("quantile requires 0 < u < 1")
    return _out(p.lam * np.power(-np.log1p(-u), 1.0 / p.alpha))


def from_cumulative_hazard(h, p: WeibullParams):
    """Time at which the cumulative hazard reaches ``h``.

    Equal to ``quantile(1 - exp(-h), p)`` but without the round trip through
    ``u``, which loses digits when ``h`` is small.
    """
    h = _check_positive(h)
    return _out(p.lam * np.power(h, 1.0 / p.alpha))


def stf_eval(coeffs: StressCoefficients, s: StressPoint) -> float:
    """Raw linear value ``intercept + inv_temp/T + log_volt*ln V``; no clamping."""
    return coeffs.intercept + coeffs.inv_temp / s.temperature + coeffs.log_volt * math.log(s.voltage)


def stf_parameter(coeffs: StressCoefficients, s: StressPoint, name: str = "parameter") -> float:
    """Evaluate a stress translation that must yield a Weibull parameter.

    Raises ``ValueError`` when the linear value is not strictly positive.
    """
    value = stf_eval(coeffs, s)
    if not value > 0:
        raise ValueError(
            f"stress translation gives nonpositive {name} {value:.6g} at "
            f"T={s.temperature:g}, V={s.voltage:g}"
        )
    return value
