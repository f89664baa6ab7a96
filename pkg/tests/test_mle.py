"""Tests for the shape score equations, the safeguarded solver, and ``fit``."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from oracles import FOUR_CASES, bisect_root, direct_loglik, grid_argmax, profile_loglik, random_dataset
from weibull_alt import mle
from weibull_alt.censoring import Case, CensoredDataset, ProgressiveScheme, Regime, censor, generate_progressive
from weibull_alt.errors import DegenerateDataError, InformationError, ModelError, NonIdentifiableError
from weibull_alt.mle import (
    ShapeEquation,
    fit,
    fit_complete,
    lambda_aphc2,
    lambda_case1,
    lambda_phc2,
    loglik,
    plugin_residuals,
    score_aphc2,
    score_case1,
    score_phc2,
    solve_shape,
)
from weibull_alt.presets import TABLE_STRESSES, TRUE_SCALE, TRUE_SHAPE, preset_scheme
from weibull_alt.streams import stream
from weibull_alt.weibull_model import WeibullParams, stf_eval

ILLUSTRATION_PHC = [
    ((620, 632, 685), (25.2936, 662.5425)),
    ((380, 460, 596), (6.3254, 522.8471)),
    ((146, 332, 400), (3.3928, 332.1593)),
]
ILLUSTRATION_COMPLETE = [
    ((620, 632, 685, 822), (8.5582, 727.4088)),
    ((380, 416, 460, 596), (5.8113, 498.6429)),
    ((216, 146, 332, 400), (3.1457, 307.1342)),
]


def illustration(times, regime="phc"):
    return CensoredDataset.from_observed(times, ProgressiveScheme(4, 3, (1, 0, 0), 700.0), regime)


class TestScoreCase1:
    def test_equal_times_has_no_root(self):
        for a in (0.1, 1.0, 50.0):
            assert_allclose(score_case1(a, [1.0, 1.0], [0, 0]), 2 / a, rtol=1e-14)

    def test_brackets_illustration_root(self):
        t, r = (620, 632, 685), (1, 0, 0)
        assert score_case1(1.0, t, r) > 0 > score_case1(100.0, t, r)
        assert score_case1(25.0, t, r) > 0 > score_case1(25.6, t, r)

    def test_closed_form(self):
        """Compare with a literal transcription of the score."""
        t = np.array([0.3, 0.9, 1.4, 2.2])
        r = np.array([1, 0, 2, 0])
        a = 1.7
        w = (1 + r) * t**a
        expected = 4 / a + np.log(t).sum() - 4 * (w * np.log(t)).sum() / w.sum()
        assert_allclose(score_case1(a, t, r), expected, rtol=1e-13)

    def test_lambda_equal_times(self):
        for a in (0.5, 3.0, 40.0):
            assert_allclose(lambda_case1(a, [2.5, 2.5, 2.5], [0, 0, 0]), 2.5, rtol=1e-14)

    def test_lambda_table_value(self):
        assert abs(lambda_case1(25.293575, (620, 632, 685), (1, 0, 0)) - 662.5425) <= 1e-3

    def test_lambda_complete_table_value(self):
        assert abs(lambda_case1(8.558153, (620, 632, 685, 822), (0, 0, 0, 0)) - 727.4088) <= 1e-3

    def test_large_shape_is_finite(self):
        assert math.isfinite(score_case1(5000.0, [620, 632, 685], [1, 0, 0]))

    def test_grid_argmax_score_near_zero(self):
        """At the grid argmax the score is at most one grid step times its slope away from zero."""
        for seed in range(20):
            ds = random_dataset(seed, Regime.PHC, Case.CASE_I)
            eq = ShapeEquation.for_dataset(ds)
            a_grid, _ = grid_argmax(ds)
            assert abs(eq.score(a_grid)) <= abs(eq.derivative(a_grid)) * 1e-4


class TestScorePhc2:
    def test_no_censored_units_reduces_to_case1(self):
        t, r = (0.2, 0.5, 0.7), (1, 0, 2)
        for a in (0.4, 2.0, 9.0):
            assert_allclose(score_phc2(a, t, r, 1.0, 0), score_case1(a, t, r), rtol=1e-13)
            assert_allclose(lambda_phc2(a, t, r, 1.0, 0), lambda_case1(a, t, r), rtol=1e-13)

    def test_closed_form(self):
        t, r, T, rs = np.array([0.1, 0.3]), np.array([1, 0]), 0.5, 3
        a = 2.2
        num = ((1 + r) * t**a * np.log(t)).sum() + rs * T**a * math.log(T)
        den = ((1 + r) * t**a).sum() + rs * T**a
        expected = 2 / a + np.log(t).sum() - 2 * num / den
        assert_allclose(score_phc2(a, t, r, T, rs), expected, rtol=1e-13)
        assert_allclose(lambda_phc2(a, t, r, T, rs), (den / 2) ** (1 / a), rtol=1e-13)

    def test_lambda_all_at_cutoff(self):
        t, r, T, rs = (0.5, 0.5), (1, 2), 0.5, 4
        for a in (0.7, 3.0):
            expected = T * ((2 + 3 + rs) / 2) ** (1 / a)
            assert_allclose(lambda_phc2(a, t, r, T, rs), expected, rtol=1e-13)

    def test_small_example_matches_grid(self):
        s = ProgressiveScheme(3, 3, (0, 0, 0), 0.5)
        ds = CensoredDataset(np.array([0.1, 0.3]), s, "phc", "II", 2, 1)
        res = fit(ds)
        a_grid, lam_grid = grid_argmax(ds)
        assert abs(res.alpha - a_grid) <= 1e-4
        assert_allclose(res.lam, lam_grid, rtol=1e-4)

    def test_strict_decrease(self):
        for seed in range(50):
            ds = random_dataset(seed, Regime.PHC, Case.CASE_II)
            r = ds.scheme.removals[: ds.j]
            assert score_phc2(0.5, ds.times, r, ds.scheme.cutoff, ds.rj_star) > score_phc2(
                5.0, ds.times, r, ds.scheme.cutoff, ds.rj_star
            )

    def test_no_failures_not_identifiable(self):
        s = ProgressiveScheme(3, 3, (0, 0, 0), 0.05)
        ds = CensoredDataset(np.array([]), s, "phc", "II", 0, 3)
        with pytest.raises(NonIdentifiableError):
            fit(ds)


class TestScoreAphc2:
    def test_reduces_to_case1_when_j_equals_m(self):
        t, r = (0.2, 0.5, 0.7), (1, 0, 2)
        for a in (0.4, 2.0, 9.0):
            assert_allclose(score_aphc2(a, t, r, 3, 6), score_case1(a, t, r), rtol=1e-13)
            assert_allclose(lambda_aphc2(a, t, r, 3, 6), lambda_case1(a, t, r), rtol=1e-13)

    def test_closed_form(self):
        t = np.array([0.1, 0.3, 0.6, 0.9])
        r = np.array([2, 1, 1, 0])
        n, j, a = 8, 1, 1.9
        w = np.ones(4)
        w[0] += r[0]
        w[-1] += n - 4 - r[0]
        num = (w * t**a * np.log(t)).sum()
        den = (w * t**a).sum()
        expected = 4 / a + np.log(t).sum() - 4 * num / den
        assert_allclose(score_aphc2(a, t, r, j, n), expected, rtol=1e-13)
        assert_allclose(lambda_aphc2(a, t, r, j, n), (den / 4) ** (1 / a), rtol=1e-13)

    def test_lambda_equal_times(self):
        for a in (0.8, 4.0):
            assert_allclose(lambda_aphc2(a, [1.5] * 3, (2, 1, 0), 1, 6), 1.5 * (6 / 3) ** (1 / a), rtol=1e-13)

    def test_matches_grid(self):
        for seed in range(20):
            ds = random_dataset(100 + seed, Regime.APHC, Case.CASE_II)
            a_grid, _ = grid_argmax(ds)
            assert abs(fit(ds).alpha - a_grid) <= 1e-4 * max(1.0, a_grid)

    def test_rejects_too_small_n(self):
        with pytest.raises(ValueError):
            ShapeEquation.aphc2([0.1, 0.2, 0.3], (3, 0, 0), 1, 4)


class TestMonotonicity:
    @pytest.mark.parametrize("regime, case", FOUR_CASES)
    def test_strictly_decreasing(self, regime, case):
        grid = np.geomspace(0.05, 80, 40)
        for seed in range(25):
            eq = ShapeEquation.for_dataset(random_dataset(seed, regime, case))
            f = np.array([eq.score(a) for a in grid])
            assert np.all(np.diff(f) < 0)

    @pytest.mark.parametrize("regime, case", FOUR_CASES)
    def test_derivative_matches_finite_difference(self, regime, case):
        for seed in range(10):
            eq = ShapeEquation.for_dataset(random_dataset(seed, regime, case))
            for a in (0.3, 2.0, 11.0):
                h = 1e-6 * a
                fd = (eq.score(a + h) - eq.score(a - h)) / (2 * h)
                assert_allclose(eq.derivative(a), fd, rtol=1e-5)

    @pytest.mark.parametrize("regime, case", FOUR_CASES)
    def test_profile_matches_direct_likelihood(self, regime, case):
        """The plug-in scale and the profiled score agree with the written-out likelihood."""
        for seed in range(5):
            ds = random_dataset(seed, regime, case)
            eq = ShapeEquation.for_dataset(ds)
            for a in (0.7, 3.0):
                prof, lam_num = profile_loglik(ds, a)
                assert_allclose(eq.scale(a), lam_num, rtol=1e-6)
                assert_allclose(direct_loglik(ds, a, eq.scale(a)), prof, rtol=1e-10, atol=1e-10)
                assert_allclose(loglik(ds, a, 1.3) - loglik(ds, a, 0.9),
                                direct_loglik(ds, a, 1.3) - direct_loglik(ds, a, 0.9), rtol=1e-10, atol=1e-10)

    @given(st.lists(st.floats(0.01, 100.0), min_size=2, max_size=15, unique=True), st.floats(0.1, 20), st.floats(0.1, 20))
    @settings(max_examples=100, deadline=None)
    def test_hypothesis_decreasing(self, times, a1, a2):
        if abs(a1 - a2) < 1e-6 * max(a1, a2):
            return
        lo, hi = sorted((a1, a2))
        eq = ShapeEquation.case1(sorted(times), np.zeros(len(times)))
        assert eq.score(lo) > eq.score(hi)


class TestSolver:
    @pytest.mark.parametrize("root", [1e-4, 0.3, 7.0, 2e3, 5e5])
    def test_bracket_expansion(self, root):
        got = solve_shape(lambda a: 1 / a - 1 / root, lambda a: -1 / a**2)
        assert_allclose(got, root, rtol=1e-9)

    def test_no_sign_change(self):
        with pytest.raises(DegenerateDataError):
            solve_shape(lambda a: 1.0)

    def test_bisection_only(self):
        got, its = solve_shape(lambda a: math.log(3.0 / a), full_output=True)
        assert_allclose(got, 3.0, rtol=1e-9)
        assert its > 1

    def test_zero_newton_steps_still_converges(self):
        eq = ShapeEquation.case1([620, 632, 685], [1, 0, 0])
        a0 = solve_shape(eq.score, eq.derivative, max_newton=0, n_obs=3)
        a1 = solve_shape(eq.score, eq.derivative, n_obs=3)
        assert abs(a0 - a1) <= 1e-8

    def test_invalid_bracket(self):
        with pytest.raises(ValueError):
            solve_shape(lambda a: 1 - a, bracket=(2.0, 1.0))

    @pytest.mark.parametrize("regime, case", FOUR_CASES)
    def test_agrees_with_bisection(self, regime, case):
        for seed in range(25):
            eq = ShapeEquation.for_dataset(random_dataset(seed, regime, case))
            a = solve_shape(eq.score, eq.derivative, n_obs=eq.n_obs)
            assert abs(a - bisect_root(eq.score)) <= 1e-8

    @pytest.mark.parametrize("times, expected", [((620, 632, 685), 25.2936), ((146, 332, 400), 3.3928)])
    def test_illustration_shape(self, times, expected):
        eq = ShapeEquation.case1(times, (1, 0, 0))
        assert abs(solve_shape(eq.score, eq.derivative, n_obs=3) - expected) <= 1e-3


class TestFit:
    @pytest.mark.parametrize("times, expected", ILLUSTRATION_PHC)
    @pytest.mark.parametrize("regime", ["phc", "aphc"])
    def test_illustration(self, times, expected, regime):
        res = fit(illustration(times, regime))
        assert res.case is Case.CASE_I
        assert abs(res.alpha - expected[0]) <= 1e-3
        assert abs(res.lam - expected[1]) <= 1e-3

    @pytest.mark.parametrize("times, expected", ILLUSTRATION_COMPLETE)
    def test_complete(self, times, expected):
        p = fit_complete(times)
        assert abs(p.alpha - expected[0]) <= 1e-3
        assert abs(p.lam - expected[1]) <= 1e-3

    def test_regimes_identical_in_case_one(self):
        a = fit(illustration((380, 460, 596), "phc"))
        b = fit(illustration((380, 460, 596), "aphc"))
        assert a.alpha == b.alpha and a.lam == b.lam and a.se_alpha == b.se_alpha

    def test_equal_times_degenerate(self):
        with pytest.raises(DegenerateDataError):
            fit_complete([2.0, 2.0, 2.0])

    def test_single_failure_degenerate(self):
        """One failure and nothing censored elsewhere leaves a single support point."""
        s = ProgressiveScheme(2, 2, (0, 0), 0.5)
        ds = CensoredDataset(np.array([0.5]), s, "phc", "II", 1, 1)
        with pytest.raises(DegenerateDataError):
            fit(ds)

    @pytest.mark.parametrize("regime, case", FOUR_CASES)
    def test_plugin_residuals(self, regime, case):
        for seed in range(25):
            ds = random_dataset(seed, regime, case)
            res = fit(ds)
            r_shape, r_scale = plugin_residuals(ds, res.alpha, res.lam)
            assert abs(r_shape) <= 1e-8 and abs(r_scale) <= 1e-8
            assert abs(res.score_residual) <= 1e-8

    @pytest.mark.parametrize("regime, case", FOUR_CASES)
    def test_information(self, regime, case):
        """Observed information matches an independent finite-difference Hessian."""
        for seed in range(5):
            ds = random_dataset(seed, regime, case)
            res = fit(ds)
            a, lam = res.alpha, res.lam
            h, k = 1e-4 * a, 1e-4 * lam
            f = lambda x, y: direct_loglik(ds, x, y)
            haa = (f(a + h, lam) - 2 * f(a, lam) + f(a - h, lam)) / h**2
            hll = (f(a, lam + k) - 2 * f(a, lam) + f(a, lam - k)) / k**2
            hal = (f(a + h, lam + k) - f(a + h, lam - k) - f(a - h, lam + k) + f(a - h, lam - k)) / (4 * h * k)
            oracle = -np.array([[haa, hal], [hal, hll]])
            assert_allclose(res.observed_info, oracle, rtol=1e-3, atol=1e-6 * np.abs(oracle).max())
            cov = np.linalg.inv(res.observed_info)
            assert_allclose([res.se_alpha, res.se_lambda], np.sqrt(np.diag(cov)), rtol=1e-10)
            assert np.all(np.linalg.eigvalsh(res.observed_info) > 0)

    def test_information_not_positive_definite(self, monkeypatch):
        monkeypatch.setattr(mle, "observed_information", lambda eq, a, l: -np.eye(2))
        with pytest.raises(InformationError):
            fit(illustration((620, 632, 685)))

    def test_errors_are_model_errors(self):
        for cls in (DegenerateDataError, NonIdentifiableError, InformationError):
            assert issubclass(cls, ModelError)

    def test_record(self):
        rec = fit(illustration((620, 632, 685))).as_record()
        assert rec["regime"] == "phc" and rec["case"] == "I" and rec["n_failures"] == 3
        assert abs(rec["shape"] - 25.2936) <= 1e-3
        assert {"se_shape", "se_scale", "info_aa", "info_al", "info_ll", "loglik"} <= set(rec)

    def test_standard_error_calibration(self):
        """Mean reported SE is within 30% of the Monte Carlo spread of the estimates."""
        s = preset_scheme(15)
        st_ = TABLE_STRESSES[0]
        p = WeibullParams(stf_eval(TRUE_SHAPE, st_), stf_eval(TRUE_SCALE, st_))
        fits = []
        for r in range(500):
            full = generate_progressive(s, p, stream(21, r))
            fits.append(fit(censor(full, s, "phc", p, stream(22, r))))
        a = np.array([f.alpha for f in fits])
        lam = np.array([f.lam for f in fits])
        se_a = np.mean([f.se_alpha for f in fits])
        se_l = np.mean([f.se_lambda for f in fits])
        assert abs(se_a / a.std(ddof=1) - 1) <= 0.3
        assert abs(se_l / lam.std(ddof=1) - 1) <= 0.3
