"""Progressive Type-II sampling and its PHC / APHC transformations.

A full progressive sample of ``m`` failures is produced with the exponential
spacings construction; :func:`truncate_phc` then cuts it at the cutoff time,
and :func:`regenerate_aphc` replaces the post-cutoff tail with draws from the
left-truncated law in which no further removals happen until the last failure.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import SchemeError
from .streams import as_generator
from .weibull_model import WeibullParams, cumulative_hazard, from_cumulative_hazard

logger = logging.getLogger(__name__)

__all__ = [
    "Regime",
    "Case",
    "ProgressiveScheme",
    "CensoredDataset",
    "exponential_spacings",
    "generate_progressive",
    "classify_case",
    "truncate_phc",
    "regenerate_aphc",
    "censor",
]


class Regime(str, enum.Enum):
    PHC = "phc"
    APHC = "aphc"


class Case(str, enum.Enum):
    CASE_I = "I"
    CASE_II = "II"


@dataclass(frozen=True)
class ProgressiveScheme:
    """``n`` units on test, ``m`` target failures, removals ``R_1..R_m``, cutoff ``T``."""

    n: int
    m: int
    removals: tuple[int, ...]
    cutoff: float

    def __post_init__(self):
        object.__setattr__(self, "removals", tuple(int(r) for r in self.removals))
        if self.n < 1 or self.m < 1:
            raise SchemeError(f"n and m must be positive, got n={self.n}, m={self.m}")
        if self.m > self.n:
            raise SchemeError(f"m={self.m} exceeds n={self.n}")
        if len(self.removals) != self.m:
            raise SchemeError(f"expected {self.m} removals, got {len(self.removals)}")
        if any(r < 0 for r in self.removals):
            raise SchemeError("removals must be nonnegative")
        if sum(self.removals) + self.m != self.n:
            raise SchemeError(
                f"removals sum to {sum(self.removals)} but n - m = {self.n - self.m}"
            )
        if not (math.isfinite(self.cutoff) and self.cutoff > 0):
            raise SchemeError(f"cutoff must be positive, got {self.cutoff!r}")

    @property
    def removals_array(self) -> np.ndarray:
        return np.asarray(self.removals, dtype=float)

    def removed_before(self, j: int) -> int:
        """``R_1 + ... + R_j``."""
        return sum(self.removals[:j])

    def at_risk(self) -> np.ndarray:
        """Units still on test just before each of the ``m`` failures."""
        before = np.concatenate(([0], np.cumsum(self.removals)[:-1]))
        return self.n - before - np.arange(self.m)


@dataclass(frozen=True, eq=False)
class CensoredDataset:
    """Observed failure times with the bookkeeping needed to fit them.

    ``j`` counts failures at or before the cutoff.  ``rj_star`` is the number
    of units censored at the cutoff and is only set for PHC Case II.
    """

    times: np.ndarray
    scheme: ProgressiveScheme
    regime: Regime
    case: Case
    j: int
    rj_star: int | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "case", Case(self.case))
        self._validate()

    def _validate(self):
        s, t, j = self.scheme, self.times, self.j
        if t.ndim != 1 or np.any(~(t > 0)) or np.any(np.diff(t) <= 0):
            raise SchemeError("times must be strictly increasing positive values")
        if not 0 <= j <= s.m:
            raise SchemeError(f"j={j} outside [0, {s.m}]")
        if self.case is Case.CASE_I:
            if j != s.m or t.size != s.m or t[-1] > s.cutoff:
                raise SchemeError("Case I requires all m failures at or before the cutoff")
            return
        if j == s.m:
            raise SchemeError("Case II requires fewer than m failures before the cutoff")
        if self.regime is Regime.PHC:
            if t.size != j or (j and t[-1] > s.cutoff):
                raise SchemeError("PHC Case II keeps exactly the j failures before the cutoff")
            expected = s.n - j - s.removed_before(j)
            if self.rj_star != expected or expected < 0:
                raise SchemeError(f"rj_star must be n - j - sum(R_1..R_j) = {expected}")
        else:
            if t.size != s.m:
                raise SchemeError("APHC Case II keeps m failures")
            if (j and t[j - 1] > s.cutoff) or t[j] <= s.cutoff:
                raise SchemeError("APHC Case II needs times[j-1] <= cutoff < times[j]")

    @classmethod
    def from_observed(cls, times, scheme: ProgressiveScheme, regime) -> "CensoredDataset":
        """Build a dataset from observed failure times, inferring ``j`` and the case."""
        regime = Regime(regime)
        times = np.sort(np.asarray(times, dtype=float))
        j, case = classify_case(times, scheme.cutoff, scheme.m)
        if regime is Regime.PHC and case is Case.CASE_II:
            if j != times.size:
                raise SchemeError(
                    f"PHC data must stop at the cutoff {scheme.cutoff:g}; "
                    f"{times.size - j} time(s) exceed it"
                )
            return cls(times, scheme, regime, case, j, scheme.n - j - scheme.removed_before(j))
        if times.size != scheme.m:
            raise SchemeError(f"expected {scheme.m} failure times, got {times.size}")
        return cls(times, scheme, regime, case, j)

    @property
    def n_failures(self) -> int:
        return int(self.times.size)

    def effective_removals(self) -> np.ndarray:
        """Units withdrawn at each observed failure under the realised regime."""
        s = self.scheme
        if self.case is Case.CASE_I:
            return s.removals_array.copy()
        if self.regime is Regime.PHC:
            return s.removals_array[: self.j].copy()
        eff = np.zeros(s.m)
        eff[: self.j] = s.removals[: self.j]
        eff[-1] = s.n - s.m - s.removed_before(self.j)
        return eff

    def units_accounted(self) -> int:
        """Failures + removals + units censored at the cutoff; always equals ``n``."""
        total = self.n_failures + int(self.effective_removals().sum())
        return total + (self.rj_star or 0)


def exponential_spacings(z, scheme: ProgressiveScheme) -> np.ndarray:
    """Cumulative standard-exponential progressive sample from i.i.d. Exp(1) draws.

    ``X_1 = Z_1/n`` and ``X_k = X_{k-1} + Z_k / (n - R_1 - ... - R_{k-1} - k + 1)``.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (scheme.m,):
        raise ValueError(f"need {scheme.m} exponential draws, got shape {z.shape}")
    return np.cumsum(z / scheme.at_risk())


def _strictly_increasing(times: np.ndarray) -> np.ndarray:
    for k in range(1, times.size):
        if times[k] <= times[k - 1]:
            logger.warning("tied generated times at index %d; nudging by one ulp", k)
            times[k] = np.nextafter(times[k - 1], np.inf)
    return times


def generate_progressive(scheme: ProgressiveScheme, p: WeibullParams, rng) -> np.ndarray:
    """Draw a sorted progressive Type-II Weibull sample of length ``m``.

    ``rng`` is an integer seed or a ``numpy.random.Generator``.
    """
    gen = as_generator(rng)
    u = gen.random(scheme.m)
    z = -np.log1p(-u)
    x = exponential_spacings(z, scheme)
    # quantile(1 - exp(-X)) == lam * X**(1/alpha)
    times = np.asarray(p.lam * np.power(x, 1.0 / p.alpha), dtype=float)
    return _strictly_increasing(times)


def classify_case(times, cutoff: float, m: int | None = None) -> tuple[int, Case]:
    """Return ``j`` (failures at or before ``cutoff``) and the case label."""
    times = np.asarray(times, dtype=float)
    m = times.size if m is None else m
    j = int(np.searchsorted(times, cutoff, side="right"))
    return j, (Case.CASE_I if j == times.size == m else Case.CASE_II)


def truncate_phc(full, scheme: ProgressiveScheme, cutoff: float | None = None) -> CensoredDataset:
    """Stop the test at ``min(x_(m), T)``."""
    if cutoff is not None and cutoff != scheme.cutoff:
        scheme = ProgressiveScheme(scheme.n, scheme.m, scheme.removals, cutoff)
    full = np.asarray(full, dtype=float)
    if full.size != scheme.m:
        raise SchemeError(f"expected a full sample of {scheme.m} times, got {full.size}")
    j, case = classify_case(full, scheme.cutoff, scheme.m)
    if case is Case.CASE_I:
        return CensoredDataset(full, scheme, Regime.PHC, case, j)
    rj_star = scheme.n - j - scheme.removed_before(j)
    if rj_star < 0:
        raise SchemeError(f"internal inconsistency: negative rj_star {rj_star}")
    return CensoredDataset(full[:j], scheme, Regime.PHC, case, j, rj_star)


def regenerate_aphc(full, j: int, scheme: ProgressiveScheme, p: WeibullParams, rng) -> CensoredDataset:
    """Replace ``x_(j+2..m)`` by failures of the survivors once removals stop.

    After the ``(j+1)``-th failure ``N = n - sum(R_1..R_j) - j - 1`` units
    remain, none of which is withdrawn until the ``m``-th failure.  Their
    lifetimes follow the Weibull law left-truncated at ``x_(j+1)``, so the
    first ``m - j - 1`` of their order statistics are drawn through exponential
    spacings on the cumulative-hazard scale.
    """
    full = np.asarray(full, dtype=float)
    m = scheme.m
    if full.size != m:
        raise SchemeError(f"expected a full sample of {m} times, got {full.size}")
    if not 0 <= j < m:
        raise SchemeError(f"regeneration needs 0 <= j < m, got j={j}")
    k = m - j - 1
    pool = scheme.n - scheme.removed_before(j) - j - 1
    if pool < k:
        raise SchemeError(f"only {pool} survivors remain but {k} more failures are required")
    times = full.copy()
    if k > 0:
        gen = as_generator(rng)
        z = -np.log1p(-gen.random(k))
        h0 = cumulative_hazard(full[j], p)
        h = h0 + np.cumsum(z / (pool - np.arange(k)))
        times[j + 1 :] = from_cumulative_hazard(h, p)
        times = _strictly_increasing(times)
    case = Case.CASE_I if j == m else Case.CASE_II
    return CensoredDataset(times, scheme, Regime.APHC, case, j)


def censor(full, scheme: ProgressiveScheme, regime, p: WeibullParams, rng) -> CensoredDataset:
    """Turn a full progressive sample into a PHC or APHC dataset."""
    regime = Regime(regime)
    if regime is Regime.PHC:
        return truncate_phc(full, scheme)
    j, case = classify_case(full, scheme.cutoff, scheme.m)
    if case is Case.CASE_I:
        return CensoredDataset(np.asarray(full, dtype=float), scheme, Regime.APHC, case, j)
    return regenerate_aphc(full, j, scheme, p, rng)
