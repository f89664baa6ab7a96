"""Second-stage regression of first-stage Weibull estimates on stress.

The responses here are themselves estimates, so their sampling error has to
show up in the coefficient covariance.  The covariance is therefore a sandwich

    V = (X'X)^-1 X' D X (X'X)^-1,   D = diag(sigma2_resid + v_i)

with ``v_i`` the first-stage variance (squared standard error) of response
``i``.  This is how the Murphy-Topel two-step correction reduces when the
second stage consumes the first-stage estimator directly: the cross terms
become an inflation of each response's variance.  With every ``v_i = 0`` it is
the classical OLS covariance ``sigma2_resid (X'X)^-1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import RankDeficiencyError
from .weibull_model import StressPoint

__all__ = [
    "RegressorTransform",
    "OlsFit",
    "RegressionResult",
    "build_design",
    "ols",
    "exact_solve",
    "murphy_topel_cov",
    "inference",
    "two_step",
    "two_step_fits",
]

MAX_CONDITION = 1e12
Z95 = 1.96
TERMS = ("intercept", "inv_temp", "log_volt")
RAW_TERMS = ("intercept", "temperature", "voltage")


class RegressorTransform(str, enum.Enum):
    INV_TEMP_LOG_VOLT = "inv-log"
    RAW = "raw"

    @property
    def terms(self) -> tuple[str, str, str]:
        return TERMS if self is RegressorTransform.INV_TEMP_LOG_VOLT else RAW_TERMS


@dataclass(frozen=True, eq=False)
class OlsFit:
    coef: np.ndarray
    sigma2_resid: float
    residuals: np.ndarray
    q: np.ndarray
    r: np.ndarray
    condition: float

    def bread(self) -> np.ndarray:
        """``(X'X)^-1 X'`` expressed as ``R^-1 Q'``."""
        return np.linalg.solve(self.r, self.q.T)


@dataclass(frozen=True, eq=False)
class RegressionResult:
    """Stress coefficients and (when identifiable) their corrected inference.

    For exactly identified fits only ``coef`` and ``design_condition`` are set.
    """

    coef: np.ndarray
    design_condition: float
    transform: RegressorTransform = RegressorTransform.INV_TEMP_LOG_VOLT
    se: np.ndarray | None = None
    se_uncorrected: np.ndarray | None = None
    t_stat: np.ndarray | None = None
    p_value: np.ndarray | None = None
    ci95: np.ndarray | None = None
    sigma2_resid: float | None = None
    cov: np.ndarray | None = None

    @property
    def exact(self) -> bool:
        return self.se is None

    def as_record(self) -> dict:
        rec = {"transform": self.transform.value, "design_condition": self.design_condition}
        if self.sigma2_resid is not None:
            rec["sigma2_resid"] = self.sigma2_resid
        rows = []
        for k, term in enumerate(self.transform.terms):
            row = {"term": term, "coef": float(self.coef[k])}
            if not self.exact:
                row.update(
                    se=float(self.se[k]),
                    se_uncorrected=float(self.se_uncorrected[k]),
                    t_stat=float(self.t_stat[k]),
                    p_value=float(self.p_value[k]),
                    ci_low=float(self.ci95[k, 0]),
                    ci_high=float(self.ci95[k, 1]),
                )
            rows.append(row)
        rec["terms"] = rows
        return rec


def build_design(stresses: Sequence[StressPoint], transform=RegressorTransform.INV_TEMP_LOG_VOLT) -> np.ndarray:
    """Rows ``(1, 1/T, ln V)`` or, for RAW, ``(1, T, V)``."""
    transform = RegressorTransform(transform)
    t = np.array([s.temperature for s in stresses], dtype=float)
    v = np.array([s.voltage for s in stresses], dtype=float)
    if transform is RegressorTransform.RAW:
        return np.column_stack([np.ones_like(t), t, v])
    return np.column_stack([np.ones_like(t), 1.0 / t, np.log(v)])


def _condition(x: np.ndarray) -> float:
    sv = np.linalg.svd(x, compute_uv=False)
    return math.inf if sv[-1] == 0 else float(sv[0] / sv[-1])


def ols(x, y) -> OlsFit:
    """Least squares through a thin QR factorisation.

    Residual variance uses ``k - p`` degrees of freedom and is zero when the
    system is exactly identified.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k, p = x.shape
    if y.shape != (k,):
        raise ValueError(f"response length {y.shape} does not match design rows {k}")
    if k < p:
        raise RankDeficiencyError(f"{k} rows cannot identify {p} coefficients")
    cond = _condition(x)
    if not cond <= MAX_CONDITION:
        raise RankDeficiencyError(f"design condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    q, r = np.linalg.qr(x)
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - x @ coef
    sigma2 = float(resid @ resid / (k - p)) if k > p else 0.0
    return OlsFit(coef, sigma2, resid, q, r, cond)


def exact_solve(x, y) -> np.ndarray:
    """Coefficients of an exactly identified (square) system."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != x.shape[1]:
        raise ValueError(f"exact solve needs a square design, got {x.shape}")
    return ols(x, y).coef


def murphy_topel_cov(x, sigma2_resid: float, first_stage_var, fit: OlsFit | None = None) -> np.ndarray:
    """Coefficient covariance with first-stage variances added to the residual variance."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(first_stage_var, dtype=float)
    if v.shape != (x.shape[0],) or np.any(v < 0) or np.any(~np.isfinite(v)):
        raise ValueError("first-stage variances must be finite, nonnegative, one per row")
    if fit is None:
        q, r = np.linalg.qr(x)
        bread = np.linalg.solve(r, q.T)
    else:
        bread = fit.bread()
    cov = (bread * (sigma2_resid + v)) @ bread.T
    return 0.5 * (cov + cov.T)


def inference(coef, cov) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Standard errors, t statistics, two-sided normal p-values and 95% intervals."""
    coef = np.asarray(coef, dtype=float)
    se = np.sqrt(np.clip(np.diag(np.asarray(cov, dtype=float)), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, coef / np.where(se > 0, se, 1.0), np.sign(coef) * np.inf)
    t = np.where((se == 0) & (coef == 0), 0.0, t)
    p = 2.0 * stats.norm.sf(np.abs(t))
    ci = np.column_stack([coef - Z95 * se, coef + Z95 * se])
    return se, t, p, ci


def _regress(x, y, var, transform) -> RegressionResult:
    fit = ols(x, y)
    if x.shape[0] == x.shape[1]:
        return RegressionResult(fit.coef, fit.condition, transform)
    cov = murphy_topel_cov(x, fit.sigma2_resid, var, fit)
    cov0 = murphy_topel_cov(x, fit.sigma2_resid, np.zeros_like(var), fit)
    se, t, p, ci = inference(fit.coef, cov)
    return RegressionResult(
        coef=fit.coef,
        design_condition=fit.condition,
        transform=transform,
        se=se,
        se_uncorrected=np.sqrt(np.diag(cov0)),
        t_stat=t,
        p_value=p,
        ci95=ci,
        sigma2_resid=fit.sigma2_resid,
        cov=cov,
    )


def two_step(
    shape_hat,
    scale_hat,
    stresses: Sequence[StressPoint],
    transform=RegressorTransform.INV_TEMP_LOG_VOLT,
    shape_var=None,
    scale_var=None,
) -> tuple[RegressionResult, RegressionResult]:
    """Regress first-stage shape and scale estimates on stress.

    ``shape_hat`` / ``scale_hat`` are per-stress estimates and ``*_var`` their
    squared standard errors (zero if omitted).  Exactly three stress points
    give an exactly identified fit without inference; four or more run OLS
    with the corrected covariance.  Use :func:`two_step_fits` to pass
    :class:`~weibull_alt.mle.FitResult` objects directly.
    """
    transform = RegressorTransform(transform)
    x = build_design(stresses, transform)
    k = x.shape[0]
    a = np.asarray(shape_hat, dtype=float)
    lam = np.asarray(scale_hat, dtype=float)
    if a.shape != (k,) or lam.shape != (k,):
        raise ValueError(f"need {k} shape and scale estimates, one per stress point")
    if k < 3:
        raise RankDeficiencyError(f"{k} stress points cannot identify 3 coefficients")
    va = np.zeros(k) if shape_var is None else np.asarray(shape_var, dtype=float)
    vl = np.zeros(k) if scale_var is None else np.asarray(scale_var, dtype=float)
    return _regress(x, a, va, transform), _regress(x, lam, vl, transform)


def two_step_fits(fits, stresses, transform=RegressorTransform.INV_TEMP_LOG_VOLT):
    """:func:`two_step` on a sequence of first-stage fit results."""
    fits = list(fits)
    return two_step(
        [f.alpha for f in fits],
        [f.lam for f in fits],
        stresses,
        transform,
        shape_var=[f.se_alpha**2 for f in fits],
        scale_var=[f.se_lambda**2 for f in fits],
    )
