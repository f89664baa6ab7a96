"""Monte Carlo harness: stress grids, replications, and CSV reports.

Each (pair, replication) cell draws from its own counter-based stream, so the
numbers are the same whether a run uses one worker or many.  Results are
stored in ``(replication, pair)`` arrays and written in a fixed order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .censoring import Case, ProgressiveScheme, Regime, censor, generate_progressive
from .errors import ModelError
from .mle import fit
from .presets import DEFAULT_CUTOFF, STRESS_RANGES, TRUE_SCALE, TRUE_SHAPE, preset_scheme
from .streams import TAG_DATA, TAG_STRESS, check_seed, stream
from .twostep import RegressorTransform, two_step
from .weibull_model import StressCoefficients, StressPoint, WeibullParams, stf_eval

logger = logging.getLogger(__name__)

ML_COLUMNS = (
    "index", "T", "V", "alpha_true", "lambda_true",
    "alpha_hat_mean", "lambda_hat_mean", "se_alpha_mean", "se_lambda_mean",
)
REGRESSION_COLUMNS = (
    "replication", "response", "term", "coef", "se", "se_uncorrected",
    "t_stat", "p_value", "ci_low", "ci_high", "n_pairs",
)
SUMMARY_COLUMNS = (
    "response", "term", "true", "coef_mean", "coef_sd", "se_mean",
    "se_uncorrected_mean", "t_stat_mean", "ci_low_mean", "ci_high_mean", "replications",
)
ERROR_COLUMNS = ("pair_index", "replication", "alpha_err", "lambda_err", "se_alpha", "se_lambda")


@dataclass(frozen=True)
class SimulationConfig:
    """Everything that determines a simulation run."""

    preset: int | None = 15
    regime: Regime = Regime.PHC
    replications: int = 100
    seed: int = 0
    scheme: ProgressiveScheme | None = None
    true_shape_coeffs: StressCoefficients = TRUE_SHAPE
    true_scale_coeffs: StressCoefficients = TRUE_SCALE
    cutoff: float = DEFAULT_CUTOFF
    n_pairs: int = 50
    n_table_pairs: int = 10
    stress_ranges: tuple[float, float, float, float] = STRESS_RANGES
    transform: RegressorTransform = RegressorTransform.INV_TEMP_LOG_VOLT
    stresses: tuple[StressPoint, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "transform", RegressorTransform(self.transform))
        object.__setattr__(self, "stress_ranges", tuple(float(v) for v in self.stress_ranges))
        if self.stresses is not None:
            object.__setattr__(self, "stresses", tuple(self.stresses))
            object.__setattr__(self, "n_pairs", len(self.stresses))
        self.validate()

    def validate(self) -> None:
        if self.replications < 1:
            raise ValueError(f"replications must be at least 1, got {self.replications}")
        check_seed(self.seed)
        if self.scheme is None and self.preset is None:
            raise ValueError("either a preset or an explicit scheme is required")
        if self.scheme is None and not 1 <= self.preset <= 15:
            raise ValueError(f"preset must be between 1 and 15, got {self.preset}")
        if not (math.isfinite(self.cutoff) and self.cutoff > 0):
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")
        if self.n_pairs < 3:
            raise ValueError(f"at least 3 stress pairs are needed, got {self.n_pairs}")
        if self.n_table_pairs < 0:
            raise ValueError("n_table_pairs must be nonnegative")
        t_lo, t_hi, v_lo, v_hi = self.stress_ranges
        if not (0 < t_lo <= t_hi and 0 < v_lo <= v_hi):
            raise ValueError(f"invalid stress ranges {self.stress_ranges}")

    def resolved_scheme(self) -> ProgressiveScheme:
        if self.scheme is not None:
            s = self.scheme
            return s if s.cutoff == self.cutoff else replace(s, cutoff=self.cutoff)
        return preset_scheme(self.preset, self.cutoff)

    def to_dict(self) -> dict:
        d = {
            "preset": self.preset,
            "regime": self.regime.value,
            "replications": self.replications,
            "seed": self.seed,
            "scheme": None,
            "true_shape_coeffs": list(self.true_shape_coeffs.as_tuple()),
            "true_scale_coeffs": list(self.true_scale_coeffs.as_tuple()),
            "cutoff": self.cutoff,
            "n_pairs": self.n_pairs,
            "n_table_pairs": self.n_table_pairs,
            "stress_ranges": list(self.stress_ranges),
            "transform": self.transform.value,
            "stresses": None,
        }
        if self.scheme is not None:
            s = self.scheme
            d["scheme"] = {"n": s.n, "m": s.m, "removals": list(s.removals), "cutoff": s.cutoff}
        if self.stresses is not None:
            d["stresses"] = [[s.temperature, s.voltage] for s in self.stresses]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
        kw = dict(d)
        if kw.get("scheme") is not None:
            s = kw["scheme"]
            kw["scheme"] = ProgressiveScheme(
                int(s["n"]), int(s["m"]), tuple(s["removals"]), float(s.get("cutoff", kw.get("cutoff", DEFAULT_CUTOFF)))
            )
        for key in ("true_shape_coeffs", "true_scale_coeffs"):
            if kw.get(key) is not None:
                kw[key] = StressCoefficients(*map(float, kw[key]))
        if kw.get("stresses") is not None:
            kw["stresses"] = tuple(StressPoint(float(t), float(v)) for t, v in kw["stresses"])
        return cls(**{k: v for k, v in kw.items() if v is not None or k in ("preset", "scheme", "stresses")})


@dataclass(frozen=True)
class RunArtifacts:
    ml_table: Path
    regression_table: Path
    regression_summary: Path
    error_histogram: Path
    manifest: Path


@dataclass(eq=False)
class SimulationResult:
    """Per-cell estimates, indexed ``[replication, pair]``; NaN marks a failed fit."""

    config: SimulationConfig
    stresses: tuple[StressPoint, ...]
    true_params: tuple[WeibullParams, ...]
    alpha_hat: np.ndarray
    lambda_hat: np.ndarray
    se_alpha: np.ndarray
    se_lambda: np.ndarray
    case_two: np.ndarray
    regressions: list = field(default_factory=list)

    @property
    def alpha_true(self) -> np.ndarray:
        return np.array([p.alpha for p in self.true_params])

    @property
    def lambda_true(self) -> np.ndarray:
        return np.array([p.lam for p in self.true_params])

    @property
    def failed(self) -> int:
        return int(np.isnan(self.alpha_hat).sum())

    def rmse(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-pair RMSE of the shape and scale estimates over successful fits."""
        ea = self.alpha_hat - self.alpha_true
        el = self.lambda_hat - self.lambda_true
        return np.sqrt(np.nanmean(ea**2, axis=0)), np.sqrt(np.nanmean(el**2, axis=0))


def draw_stresses(config: SimulationConfig) -> tuple[StressPoint, ...]:
    """Explicit stresses if configured, else uniform draws over the stress box."""
    if config.stresses is not None:
        return config.stresses
    t_lo, t_hi, v_lo, v_hi = config.stress_ranges
    gen = stream(config.seed, TAG_STRESS)
    t = gen.uniform(t_lo, t_hi, config.n_pairs)
    v = gen.uniform(v_lo, v_hi, config.n_pairs)
    return tuple(StressPoint(float(a), float(b)) for a, b in zip(t, v))


def true_parameters(config: SimulationConfig, stresses: Sequence[StressPoint]) -> tuple[WeibullParams, ...]:
    """True laws at each stress; raises if either translation is nonpositive."""
    if config.stresses is None:
        # Both translations are monotone in 1/T and ln V, so the box corners bound them.
        t_lo, t_hi, v_lo, v_hi = config.stress_ranges
        corners = [StressPoint(t, v) for t in (t_lo, t_hi) for v in (v_lo, v_hi)]
        _check_positive_stf(config, corners)
    _check_positive_stf(config, stresses)
    return tuple(
        WeibullParams(stf_eval(config.true_shape_coeffs, s), stf_eval(config.true_scale_coeffs, s))
        for s in stresses
    )


def _check_positive_stf(config, points):
    for s in points:
        for name, coeffs in (("shape", config.true_shape_coeffs), ("scale", config.true_scale_coeffs)):
            value = stf_eval(coeffs, s)
            if not value > 0:
                raise ValueError(
                    f"true {name} is nonpositive ({value:.6g}) at T={s.temperature:g}, V={s.voltage:g}"
                )


def simulate_cell(scheme, regime, params: WeibullParams, seed: int, pair: int, rep: int):
    """Generate, censor and fit one dataset; returns (alpha, lambda, se_a, se_l, case_two)."""
    gen = stream(seed, TAG_DATA, pair, rep)
    full = generate_progressive(scheme, params, gen)
    ds = censor(full, scheme, regime, params, gen)
    try:
        res = fit(ds)
    except ModelError as exc:
        logger.debug("fit failed for pair %d replication %d: %s", pair, rep, exc)
        return (math.nan, math.nan, math.nan, math.nan, ds.case is Case.CASE_II)
    return (res.alpha, res.lam, res.se_alpha, res.se_lambda, ds.case is Case.CASE_II)


def _replication_block(args):
    scheme, regime, params, seed, reps = args
    return [
        [simulate_cell(scheme, regime, p, seed, pair, rep) for pair, p in enumerate(params)]
        for rep in reps
    ]


def _chunks(n: int, k: int) -> list[range]:
    k = max(1, min(k, n))
    bounds = np.linspace(0, n, k + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_simulation(config: SimulationConfig, workers: int = 1, regress: bool = True) -> SimulationResult:
    """Run every replication and (optionally) the per-replication two-step regression."""
    scheme = config.resolved_scheme()
    stresses = draw_stresses(config)
    params = true_parameters(config, stresses)
    reps = config.replications
    blocks = _chunks(reps, workers * 4 if workers > 1 else 1)
    jobs = [(scheme, config.regime, params, config.seed, block) for block in blocks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_replication_block, jobs))
    else:
        parts = [_replication_block(job) for job in jobs]
    cells = np.array([row for part in parts for row in part], dtype=float)
    result = SimulationResult(
        config=config,
        stresses=stresses,
        true_params=params,
        alpha_hat=cells[:, :, 0],
        lambda_hat=cells[:, :, 1],
        se_alpha=cells[:, :, 2],
        se_lambda=cells[:, :, 3],
        case_two=cells[:, :, 4].astype(bool),
    )
    if result.failed:
        logger.warning("%d of %d fits failed and are excluded", result.failed, cells.shape[0] * cells.shape[1])
    if regress:
        result.regressions = [_regress_replication(result, r) for r in range(reps)]
    return result


def _regress_replication(result: SimulationResult, rep: int):
    ok = ~np.isnan(result.alpha_hat[rep])
    if ok.sum() < 4:
        return None
    pts = [s for s, keep in zip(result.stresses, ok) if keep]
    return two_step(
        result.alpha_hat[rep, ok],
        result.lambda_hat[rep, ok],
        pts,
        result.config.transform,
        shape_var=result.se_alpha[rep, ok] ** 2,
        scale_var=result.se_lambda[rep, ok] ** 2,
    ) + (int(ok.sum()),)


def _g6(v) -> str:
    return "nan" if not np.isfinite(v) else f"{float(v):.6g}"


def _full(v) -> str:
    return repr(float(v))


def _write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def _ml_rows(res: SimulationResult):
    k = min(res.config.n_table_pairs, len(res.stresses))
    with np.errstate(all="ignore"):
        means = [np.nanmean(a, axis=0) for a in (res.alpha_hat, res.lambda_hat, res.se_alpha, res.se_lambda)]
    for i in range(k):
        s, p = res.stresses[i], res.true_params[i]
        yield [i + 1, _full(s.temperature), _full(s.voltage), _full(p.alpha), _full(p.lam),
               *(_g6(m[i]) for m in means)]


def _regression_rows(res: SimulationResult):
    for rep, reg in enumerate(res.regressions):
        if reg is None:
            continue
        shape_r, scale_r, used = reg
        for name, r in (("shape", shape_r), ("scale", scale_r)):
            for k, term in enumerate(r.transform.terms):
                yield [rep, name, term, _g6(r.coef[k]), _g6(r.se[k]), _g6(r.se_uncorrected[k]),
                       _g6(r.t_stat[k]), _g6(r.p_value[k]), _g6(r.ci95[k, 0]), _g6(r.ci95[k, 1]), used]


def regression_summary(res: SimulationResult) -> list[dict]:
    """Monte Carlo means and spreads of the per-replication regressions."""
    regs = [r for r in res.regressions if r is not None]
    out = []
    if not regs:
        return out
    cfg = res.config
    truth = {"shape": cfg.true_shape_coeffs.as_tuple(), "scale": cfg.true_scale_coeffs.as_tuple()}
    for idx, name in enumerate(("shape", "scale")):
        rs = [r[idx] for r in regs]
        coef = np.array([r.coef for r in rs])
        for k, term in enumerate(rs[0].transform.terms):
            true = truth[name][k] if cfg.transform is RegressorTransform.INV_TEMP_LOG_VOLT else math.nan
            out.append({
                "response": name,
                "term": term,
                "true": true,
                "coef_mean": coef[:, k].mean(),
                "coef_sd": coef[:, k].std(ddof=1) if len(rs) > 1 else math.nan,
                "se_mean": np.mean([r.se[k] for r in rs]),
                "se_uncorrected_mean": np.mean([r.se_uncorrected[k] for r in rs]),
                "t_stat_mean": np.mean([r.t_stat[k] for r in rs]),
                "ci_low_mean": np.mean([r.ci95[k, 0] for r in rs]),
                "ci_high_mean": np.mean([r.ci95[k, 1] for r in rs]),
                "replications": len(rs),
            })
    return out


def _error_rows(res: SimulationResult):
    ea = res.alpha_hat - res.alpha_true
    el = res.lambda_hat - res.lambda_true
    for pair in range(len(res.stresses)):
        for rep in range(res.alpha_hat.shape[0]):
            if np.isnan(ea[rep, pair]):
                continue
            yield [pair + 1, rep, _g6(ea[rep, pair]), _g6(el[rep, pair]),
                   _g6(res.se_alpha[rep, pair]), _g6(res.se_lambda[rep, pair])]


def _versions() -> dict:
    return {
        "weibull_alt": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def write_artifacts(res: SimulationResult, out_dir) -> RunArtifacts:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    arts = RunArtifacts(
        ml_table=out / "ml_table.csv",
        regression_table=out / "regression.csv",
        regression_summary=out / "regression_summary.csv",
        error_histogram=out / "errors.csv",
        manifest=out / "manifest.json",
    )
    _write_csv(arts.ml_table, ML_COLUMNS, _ml_rows(res))
    _write_csv(arts.regression_table, REGRESSION_COLUMNS, _regression_rows(res))
    summary = regression_summary(res)
    _write_csv(
        arts.regression_summary,
        SUMMARY_COLUMNS,
        ([row[c] if isinstance(row[c], (str, int)) else _g6(row[c]) for c in SUMMARY_COLUMNS] for row in summary),
    )
    _write_csv(arts.error_histogram, ERROR_COLUMNS, _error_rows(res))

    scheme = res.config.resolved_scheme()
    files = {}
    for p in (arts.ml_table, arts.regression_table, arts.regression_summary, arts.error_histogram):
        files[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    manifest = {
        "config": res.config.to_dict(),
        "seed": res.config.seed,
        "scheme": {"n": scheme.n, "m": scheme.m, "removals": list(scheme.removals), "cutoff": scheme.cutoff},
        "stresses": [[s.temperature, s.voltage] for s in res.stresses],
        "true_params": [[p.alpha, p.lam] for p in res.true_params],
        "failed_fits": res.failed,
        "case_two_fraction": float(res.case_two.mean()),
        "versions": _versions(),
        "files": files,
    }
    arts.manifest.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return arts


def cmd_simulate(config: SimulationConfig, out_dir=".", workers: int = 1) -> RunArtifacts:
    """Run a simulation and write its CSVs and manifest into ``out_dir``."""
    return write_artifacts(run_simulation(config, workers=workers), out_dir)
