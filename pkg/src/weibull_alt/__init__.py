"""Weibull accelerated life testing under progressive hybrid censoring."""

__version__ = "0.1.0"

from .censoring import (
    Case,
    CensoredDataset,
    ProgressiveScheme,
    Regime,
    censor,
    classify_case,
    generate_progressive,
    regenerate_aphc,
    truncate_phc,
)
from .errors import (
    DegenerateDataError,
    InformationError,
    ModelError,
    NonIdentifiableError,
    RankDeficiencyError,
    SchemeError,
)
from .gof import AdResult, ad_statistic, ad_test
from .mle import FitResult, ShapeEquation, fit, fit_complete, solve_shape
from .presets import preset_scheme
from .twostep import RegressionResult, RegressorTransform, two_step, two_step_fits
from .weibull_model import StressCoefficients, StressPoint, WeibullParams, stf_eval

__all__ = [
    "AdResult", "Case", "CensoredDataset", "DegenerateDataError", "FitResult",
    "InformationError", "ModelError", "NonIdentifiableError", "ProgressiveScheme",
    "RankDeficiencyError", "Regime", "RegressionResult", "RegressorTransform",
    "SchemeError", "ShapeEquation", "StressCoefficients", "StressPoint", "WeibullParams",
    "ad_statistic", "ad_test", "censor", "classify_case", "fit", "fit_complete",
    "generate_progressive", "preset_scheme", "regenerate_aphc", "solve_shape",
    "stf_eval", "truncate_phc", "two_step", "two_step_fits",
]
