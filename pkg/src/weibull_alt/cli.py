"""Command line entry point: ``simulate``, ``fit``, ``regress`` and ``gof``.

Exit codes are 0 on success, 1 for numeric or model failures, 2 for bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .censoring import CensoredDataset, ProgressiveScheme, Regime
from .errors import ModelError
from .gof import DEFAULT_REPS, ad_test
from .harness import SimulationConfig, cmd_simulate
from .mle import fit
from .twostep import RegressorTransform, build_design, exact_solve, two_step
from .weibull_model import StressPoint

logger = logging.getLogger("weibull_alt")


def _parse_rows(path, width: tuple[int, ...], what: str) -> list[list[float]]:
    """Read numeric CSV rows; a leading non-numeric line is taken as a header."""
    rows = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        try:
            values = [float(f) for f in fields]
        except ValueError:
            if not rows and lineno == _first_content_line(text):
                continue
            raise ValueError(f"{path}: line {lineno}: cannot parse {line!r} as {what}") from None
        if len(values) not in width:
            raise ValueError(f"{path}: line {lineno}: expected {' or '.join(map(str, width))} values, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"{path}: line {lineno}: non-finite value in {line!r}")
        rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def _first_content_line(text: str) -> int:
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s and not s.startswith("#"):
            return lineno
    return 0


def read_times(path) -> np.ndarray:
    times = np.array([r[0] for r in _parse_rows(path, (1,), "a failure time")])
    if np.any(times <= 0):
        raise ValueError(f"{path}: failure times must be positive")
    return times


def read_stresses(path) -> tuple[StressPoint, ...]:
    return tuple(StressPoint(t, v) for t, v in _parse_rows(path, (2,), "a T,V pair"))


def read_fits(path) -> np.ndarray:
    rows = _parse_rows(path, (2, 4), "shape,scale[,se_shape,se_scale]")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows mix 2 and 4 columns")
    return np.array(rows)


def _parse_removals(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(r) for r in text.replace(" ", "").split(",") if r != "")
    except ValueError:
        raise ValueError(f"removals must be comma-separated integers, got {text!r}") from None


def _emit(record: dict, out: str | None) -> None:
    doc = json.dumps(record, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(doc + "\n", encoding="utf-8")
    print(doc)


def run_simulate(args) -> int:
    base = {}
    if args.config:
        base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(base, dict):
            raise ValueError(f"{args.config}: configuration must be a JSON object")
    overrides = {
        "preset": args.preset,
        "regime": args.regime,
        "replications": args.reps,
        "seed": args.seed,
        "cutoff": args.cutoff,
        "n_pairs": args.pairs,
        "n_table_pairs": args.table_pairs,
        "transform": args.transform,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.stress_file:
        base["stresses"] = [[s.temperature, s.voltage] for s in read_stresses(args.stress_file)]
        base.pop("n_pairs", None)
    config = SimulationConfig.from_dict(base)
    arts = cmd_simulate(config, args.out, workers=args.workers)
    _emit({k: str(v) for k, v in vars(arts).items()}, None)
    return 0


def run_fit(args) -> int:
    times = read_times(args.data)
    removals = _parse_removals(args.removals) if args.removals else None
    m = args.m if args.m is not None else (len(removals) if removals else len(times))
    if removals is None:
        removals = (0,) * m
    n = args.n if args.n is not None else m + sum(removals)
    scheme = ProgressiveScheme(n, m, removals, args.cutoff)
    ds = CensoredDataset.from_observed(times, scheme, Regime(args.regime))
    _emit(fit(ds).as_record(), args.out)
    return 0


def run_regress(args) -> int:
    fits = read_fits(args.fits)
    stresses = read_stresses(args.stress)
    if len(fits) != len(stresses):
        raise ValueError(f"{len(fits)} fit rows but {len(stresses)} stress rows")
    transform = RegressorTransform(args.transform)
    if args.exact:
        if len(fits) != 3:
            raise ValueError(f"--exact needs exactly 3 rows, got {len(fits)}")
        x = build_design(stresses, transform)
        record = {
            "transform": transform.value,
            "shape": dict(zip(transform.terms, map(float, exact_solve(x, fits[:, 0])))),
            "scale": dict(zip(transform.terms, map(float, exact_solve(x, fits[:, 1])))),
        }
    else:
        var = (fits[:, 2] ** 2, fits[:, 3] ** 2) if fits.shape[1] == 4 else (None, None)
        shape_r, scale_r = two_step(fits[:, 0], fits[:, 1], stresses, transform, *var)
        record = {"shape": shape_r.as_record(), "scale": scale_r.as_record()}
    _emit(record, args.out)
    return 0


def run_gof(args) -> int:
    times = read_times(args.data)
    _emit(ad_test(times, bootstrap_reps=args.reps, seed=args.seed).as_record(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weibull-alt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte Carlo study over a stress grid")
    s.add_argument("--config", help="JSON file mirroring SimulationConfig; flags override it")
    s.add_argument("--preset", type=int)
    s.add_argument("--regime", choices=[r.value for r in Regime])
    s.add_argument("--reps", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--pairs", type=int)
    s.add_argument("--table-pairs", type=int)
    s.add_argument("--cutoff", type=float)
    s.add_argument("--stress-file", help="CSV of T,V rows; replaces the random stress draw")
    s.add_argument("--transform", choices=[t.value for t in RegressorTransform])
    s.add_argument("--out", default=".")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=run_simulate)

    f = sub.add_parser("fit", help="ML fit of one censored dataset")
    f.add_argument("--data", required=True)
    f.add_argument("--n", type=int)
    f.add_argument("--m", type=int)
    f.add_argument("--removals", help='e.g. "1,0,0"')
    f.add_argument("--cutoff", type=float, required=True)
    f.add_argument("--regime", choices=[r.value for r in Regime], default="phc")
    f.add_argument("--out")
    f.set_defaults(func=run_fit)

    r = sub.add_parser("regress", help="regress per-stress fits on stress")
    r.add_argument("--fits", required=True, help="CSV with shape,scale[,se_shape,se_scale]")
    r.add_argument("--stress", required=True, help="CSV with T,V")
    r.add_argument("--exact", action="store_true", help="exactly identified solve (3 rows)")
    r.add_argument("--transform", choices=[t.value for t in RegressorTransform], default="inv-log")
    r.add_argument("--out")
    r.set_defaults(func=run_regress)

    g = sub.add_parser("gof", help="Anderson-Darling test with bootstrap p-value")
    g.add_argument("--data", required=True)
    g.add_argument("--reps", type=int, default=DEFAULT_REPS)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=run_gof)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
