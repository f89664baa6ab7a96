"""Maximum likelihood for Weibull data under PHC and APHC.

Every case has the same structure once the scale is profiled out.  With ``d``
observed failures, support points ``y_k`` carrying weights ``w_k`` (each
failure counts once plus the units withdrawn with it; censoring at the cutoff
or at the last failure adds further weight), the log-likelihood is

    d log(alpha/lam) + (alpha - 1) sum log(x_i/lam) - sum_k w_k (y_k/lam)^alpha

so ``lam^alpha = sum_k w_k y_k^alpha / d`` and the shape solves

    d/alpha + sum log x_i - d * sum w y^alpha log y / sum w y^alpha = 0.

The left side is strictly decreasing in ``alpha`` (its derivative is
``-d/alpha^2 - d * weighted variance of log y``), so the root is unique and a
bracketed Newton iteration finds it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .censoring import Case, CensoredDataset, Regime
from .errors import DegenerateDataError, InformationError, ModelError, NonIdentifiableError
from .weibull_model import WeibullParams

__all__ = [
    "ShapeEquation",
    "FitResult",
    "score_case1",
    "lambda_case1",
    "score_phc2",
    "lambda_phc2",
    "score_aphc2",
    "lambda_aphc2",
    "solve_shape",
    "fit",
    "fit_complete",
    "loglik",
    "plugin_residuals",
]

BRACKET_INIT = (0.05, 50.0)
BRACKET_LIMITS = (1e-6, 1e6)
HESSIAN_REL_STEP = 1e-5


class ShapeEquation:
    """Profiled score equation for one censored sample.

    Parameters
    ----------
    failures : array
        Observed failure times (length ``d``).
    support : array
        Points entering the cumulative-hazard sum.
    weights : array
        Nonnegative weight of each support point.
    """

    def __init__(self, failures, support, weights):
        failures = np.asarray(failures, dtype=float)
        support = np.asarray(support, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if failures.size == 0:
            raise NonIdentifiableError("no failures observed; the likelihood has no interior maximum")
        if np.any(~(failures > 0)) or np.any(~(support > 0)):
            raise ValueError("failure and censoring times must be positive")
        if support.shape != weights.shape or np.any(weights < 0):
            raise ValueError("support and weights must match and weights must be nonnegative")
        keep = weights > 0
        self.n_obs = int(failures.size)
        self.log_sum = float(np.log(failures).sum())
        self.logs = np.log(support[keep])
        self.weights = weights[keep]
        self._shift = float(self.logs.max())

    @classmethod
    def case1(cls, times, removals) -> "ShapeEquation":
        """All ``m`` failures before the cutoff (PHC or APHC Case I)."""
        times = np.asarray(times, dtype=float)
        removals = np.asarray(removals, dtype=float)
        if times.shape != removals.shape:
            raise ValueError("times and removals must have the same length")
        return cls(times, times, 1.0 + removals)

    @classmethod
    def phc2(cls, times, removals, cutoff: float, rj_star: int) -> "ShapeEquation":
        """PHC Case II: ``j`` failures, then ``rj_star`` units censored at the cutoff."""
        times = np.asarray(times, dtype=float)
        removals = np.asarray(removals, dtype=float)[: times.size]
        if times.size == 0:
            raise NonIdentifiableError(
                "PHC with no failure before the cutoff: likelihood (1-F(T))^n has no interior maximum"
            )
        if removals.size != times.size:
            raise ValueError("need one removal count per observed failure")
        if rj_star < 0:
            raise ValueError("rj_star must be nonnegative")
        support = np.append(times, cutoff)
        weights = np.append(1.0 + removals, float(rj_star))
        return cls(times, support, weights)

    @classmethod
    def aphc2(cls, times, removals, j: int, n: int) -> "ShapeEquation":
        """APHC Case II: removals stop after the ``j``-th failure, the rest leave at ``x_m``."""
        times = np.asarray(times, dtype=float)
        m = times.size
        if not 0 <= j <= m:
            raise ValueError(f"j={j} outside [0, {m}]")
        early = np.asarray(removals, dtype=float)[:j]
        if early.size != j:
            raise ValueError(f"need at least j={j} removal counts")
        tail = n - m - early.sum()
        if tail < 0:
            raise ValueError(f"n={n} too small: n - m - sum(R_1..R_j) = {tail}")
        weights = np.ones(m)
        weights[:j] += early
        weights[-1] += tail
        return cls(times, times, weights)

    @classmethod
    def for_dataset(cls, ds: CensoredDataset) -> "ShapeEquation":
        s = ds.scheme
        if ds.case is Case.CASE_I:
            return cls.case1(ds.times, s.removals)
        if ds.regime is Regime.PHC:
            return cls.phc2(ds.times, s.removals[: ds.j], s.cutoff, ds.rj_star)
        return cls.aphc2(ds.times, s.removals, ds.j, s.n)

    def _moments(self, alpha: float):
        e = self.weights * np.exp(alpha * (self.logs - self._shift))
        s0 = e.sum()
        mean = (e * self.logs).sum() / s0
        return e, s0, mean

    def score(self, alpha: float) -> float:
        _, _, mean = self._moments(alpha)
        return self.n_obs / alpha + self.log_sum - self.n_obs * mean

    __call__ = score

    def derivative(self, alpha: float) -> float:
        e, s0, mean = self._moments(alpha)
        var = (e * (self.logs - mean) ** 2).sum() / s0
        return -self.n_obs / alpha**2 - self.n_obs * var

    def scale(self, alpha: float) -> float:
        """Plug-in ``lam = (sum w y^alpha / d)^(1/alpha)``."""
        _, s0, _ = self._moments(alpha)
        return math.exp(self._shift + math.log(s0 / self.n_obs) / alpha)

    def loglik(self, alpha: float, lam: float) -> float:
        """Log-likelihood up to the combinatorial constant."""
        if alpha <= 0 or lam <= 0:
            return -math.inf
        d, loglam = self.n_obs, math.log(lam)
        cum = (self.weights * np.exp(alpha * (self.logs - loglam))).sum()
        return d * math.log(alpha) - d * loglam + (alpha - 1.0) * (self.log_sum - d * loglam) - cum

    def distinct_support(self) -> int:
        return int(np.unique(self.logs).size)


def score_case1(alpha: float, times, removals) -> float:
    return ShapeEquation.case1(times, removals).score(alpha)


def lambda_case1(alpha: float, times, removals) -> float:
    return ShapeEquation.case1(times, removals).scale(alpha)


def score_phc2(alpha: float, times, removals, cutoff: float, rj_star: int) -> float:
    return ShapeEquation.phc2(times, removals, cutoff, rj_star).score(alpha)


def lambda_phc2(alpha: float, times, removals, cutoff: float, rj_star: int) -> float:
    """Scale with ``lam^alpha = [sum (1+R_i) x_i^alpha + R_j* T^alpha] / j``."""
    return ShapeEquation.phc2(times, removals, cutoff, rj_star).scale(alpha)


def score_aphc2(alpha: float, times, removals, j: int, n: int) -> float:
    return ShapeEquation.aphc2(times, removals, j, n).score(alpha)


def lambda_aphc2(alpha: float, times, removals, j: int, n: int) -> float:
    return ShapeEquation.aphc2(times, removals, j, n).scale(alpha)


def _midpoint(lo: float, hi: float) -> float:
    return math.sqrt(lo * hi) if hi > 4.0 * lo else 0.5 * (lo + hi)


def solve_shape(
    score,
    derivative=None,
    bracket: tuple[float, float] = BRACKET_INIT,
    tol: float = 1e-10,
    max_newton: int = 25,
    n_obs: float = 1.0,
    max_iter: int = 2000,
    full_output: bool = False,
):
    """Root of a strictly decreasing score by safeguarded Newton iteration.

    Newton steps are taken while they stay inside the current sign-change
    bracket and at most ``max_newton`` of them are used; bisection covers
    everything else.  Iteration stops once ``|score(a)| * a / n_obs <= tol``
    (the residual relative to the leading ``n_obs/a`` term) or the bracket
    has collapsed to 1e-12.

    Returns the root, or ``(root, iterations)`` with ``full_output=True``.

    Raises
    ------
    DegenerateDataError
        If the score keeps one sign over ``[1e-6, 1e6]``.
    """
    lo, hi = (float(b) for b in bracket)
    if not 0 < lo < hi:
        raise ValueError(f"invalid bracket {bracket!r}")
    lo_limit, hi_limit = BRACKET_LIMITS
    f_lo = score(lo)
    while f_lo <= 0 and lo > lo_limit:
        lo = max(lo / 10.0, lo_limit)
        f_lo = score(lo)
    f_hi = score(hi)
    while f_hi >= 0 and hi < hi_limit:
        hi = min(hi * 10.0, hi_limit)
        f_hi = score(hi)
    if not (f_lo > 0 > f_hi):
        raise DegenerateDataError(
            f"score has no sign change on [{lo:g}, {hi:g}]; need at least two distinct observations"
        )

    x = _midpoint(lo, hi)
    newton_steps = 0
    for iteration in range(1, max_iter + 1):
        fx = score(x)
        if not math.isfinite(fx):
            raise ModelError(f"score is not finite at alpha={x!r}")
        if fx == 0 or abs(fx) * x / n_obs <= tol:
            break
        if fx > 0:
            lo = x
        else:
            hi = x
        if hi - lo <= 1e-12 * max(1.0, hi):
            x = 0.5 * (lo + hi)
            break
        candidate = None
        if derivative is not None and newton_steps < max_newton:
            newton_steps += 1
            dfx = derivative(x)
            if dfx < 0 and math.isfinite(dfx):
                step = x - fx / dfx
                if lo < step < hi:
                    candidate = step
        x = candidate if candidate is not None else _midpoint(lo, hi)
    else:
        raise ModelError(f"shape solver did not converge in {max_iter} iterations")
    return (x, iteration) if full_output else x


@dataclass(frozen=True, eq=False)
class FitResult:
    """ML estimates with observed-information standard errors."""

    params: WeibullParams
    se_alpha: float
    se_lambda: float
    observed_info: np.ndarray
    iterations: int
    case: Case
    regime: Regime
    score_residual: float
    n_failures: int
    loglik: float

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def lam(self) -> float:
        return self.params.lam

    def as_record(self) -> dict:
        info = self.observed_info
        return {
            "regime": self.regime.value,
            "case": self.case.value,
            "n_failures": self.n_failures,
            "shape": self.alpha,
            "scale": self.lam,
            "se_shape": self.se_alpha,
            "se_scale": self.se_lambda,
            "info_aa": float(info[0, 0]),
            "info_al": float(info[0, 1]),
            "info_ll": float(info[1, 1]),
            "loglik": self.loglik,
            "iterations": self.iterations,
            "score_residual": self.score_residual,
        }


def observed_information(eq: ShapeEquation, alpha: float, lam: float) -> np.ndarray:
    """Negative Hessian of the log-likelihood by central differences."""
    h, k = HESSIAN_REL_STEP * alpha, HESSIAN_REL_STEP * lam
    f = eq.loglik
    f0 = f(alpha, lam)
    h_aa = (f(alpha + h, lam) - 2.0 * f0 + f(alpha - h, lam)) / h**2
    h_ll = (f(alpha, lam + k) - 2.0 * f0 + f(alpha, lam - k)) / k**2
    h_al = (
        f(alpha + h, lam + k) - f(alpha + h, lam - k) - f(alpha - h, lam + k) + f(alpha - h, lam - k)
    ) / (4.0 * h * k)
    return -np.array([[h_aa, h_al], [h_al, h_ll]])


def _solve(eq: ShapeEquation, tol: float, max_newton: int) -> tuple[float, int]:
    if eq.distinct_support() < 2:
        raise DegenerateDataError("fewer than two distinct support points; the shape is not identified")
    return solve_shape(eq.score, eq.derivative, tol=tol, max_newton=max_newton,
                       n_obs=eq.n_obs, full_output=True)


def fit(ds: CensoredDataset, tol: float = 1e-10, max_newton: int = 25) -> FitResult:
    """Fit shape and scale to a censored dataset, dispatching on regime and case."""
    eq = ShapeEquation.for_dataset(ds)
    alpha, iterations = _solve(eq, tol, max_newton)
    lam = eq.scale(alpha)
    info = observed_information(eq, alpha, lam)
    try:
        chol = np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        raise InformationError(
            f"observed information not positive definite at alpha={alpha:.6g}, lambda={lam:.6g}"
        ) from None
    cov = np.linalg.inv(chol).T @ np.linalg.inv(chol)
    se_alpha, se_lambda = np.sqrt(np.diag(cov))
    return FitResult(
        params=WeibullParams(alpha, lam),
        se_alpha=float(se_alpha),
        se_lambda=float(se_lambda),
        observed_info=info,
        iterations=iterations,
        case=ds.case,
        regime=ds.regime,
        score_residual=eq.score(alpha) * alpha / eq.n_obs,
        n_failures=ds.n_failures,
        loglik=eq.loglik(alpha, lam),
    )


def fit_complete(times, tol: float = 1e-10) -> WeibullParams:
    """Shape and scale of an uncensored sample (no standard errors)."""
    times = np.sort(np.asarray(times, dtype=float))
    eq = ShapeEquation.case1(times, np.zeros(times.size))
    alpha, _ = _solve(eq, tol, 25)
    return WeibullParams(alpha, eq.scale(alpha))


def loglik(ds: CensoredDataset, alpha: float, lam: float) -> float:
    return ShapeEquation.for_dataset(ds).loglik(alpha, lam)


def plugin_residuals(ds: CensoredDataset, alpha: float, lam: float) -> tuple[float, float]:
    """Scaled residuals of the shape and scale likelihood equations.

    The first is ``score(alpha) * alpha / d``; the second is
    ``sum w (y/lam)^alpha / d - 1``, which vanishes exactly when ``lam``
    solves its plug-in equation.
    """
    eq = ShapeEquation.for_dataset(ds)
    cum = (eq.weights * np.exp(alpha * (eq.logs - math.log(lam)))).sum()
    return eq.score(alpha) * alpha / eq.n_obs, cum / eq.n_obs - 1.0
