"""The fifteen censoring designs used in the simulation study and the default truths."""

from __future__ import annotations

from .censoring import ProgressiveScheme
from .weibull_model import StressCoefficients, StressPoint

DEFAULT_CUTOFF = 2.73

# Shape (alpha) is 7 + 125/T - 2 ln V; scale (lambda) is 10 + 140/T - 3 ln V.
# These are the pairs that reproduce the tabulated true alpha and lambda columns.
TRUE_SHAPE = StressCoefficients(7.0, 125.0, -2.0)
TRUE_SCALE = StressCoefficients(10.0, 140.0, -3.0)

STRESS_RANGES = (270.0, 350.0, 12.0, 22.0)

# The ten stress pairs shown in the ML tables.
TABLE_STRESSES = (
    StressPoint(319.6469, 12.4475),
    StressPoint(278.6139, 20.9161),
    StressPoint(272.6851, 18.2367),
    StressPoint(305.1315, 17.5408),
    StressPoint(321.9469, 15.1132),
    StressPoint(292.3106, 14.6494),
    StressPoint(348.0764, 16.0043),
    StressPoint(318.4830, 19.1756),
    StressPoint(298.0932, 21.5055),
    StressPoint(289.2118, 17.1251),
)

# (n, m, removals)
_PRESETS = {
    1: (58, 25, [1] * 24 + [9]),
    2: (75, 25, [2] * 25),
    3: (58, 25, [16] + [0] * 7 + [1] * 17),
    4: (80, 40, [1] * 40),
    5: (120, 40, [2] * 40),
    6: (80, 40, [5, 6] + [0] * 9 + [1] * 29),
    7: (100, 50, [1] * 50),
    8: (150, 50, [2] * 50),
    9: (100, 50, [0, 2] * 25),
    10: (150, 75, [1] * 75),
    11: (225, 75, [2] * 75),
    12: (150, 75, [0] * 50 + [3] * 25),
    13: (200, 100, [1] * 100),
    14: (300, 100, [2] * 100),
    15: (200, 100, [0] * 98 + [50, 50]),
}

HOMOGENEOUS = frozenset(k for k, (_, _, r) in _PRESETS.items() if len(set(r)) == 1)


def preset_scheme(index: int, cutoff: float = DEFAULT_CUTOFF) -> ProgressiveScheme:
    """Progressive scheme for design ``index`` (1..15)."""
    try:
        n, m, removals = _PRESETS[index]
    except KeyError:
        raise ValueError(f"preset must be between 1 and 15, got {index!r}") from None
    return ProgressiveScheme(n, m, tuple(removals), cutoff)


def check_presets() -> None:
    """Construct every preset; raises if any violates ``sum(R) + m == n``."""
    for k in _PRESETS:
        preset_scheme(k)


check_presets()
