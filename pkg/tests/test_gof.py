"""Tests for the Anderson-Darling statistic and its bootstrap p-value."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from weibull_alt.gof import ad_statistic, ad_test
from weibull_alt.streams import stream
from weibull_alt.weibull_model import WeibullParams, quantile


def ad_oracle(x, p):
    """Literal double loop over the A^2 sum."""
    x = sorted(x)
    n = len(x)
    total = 0.0
    for i in range(1, n + 1):
        fi = 1 - math.exp(-((x[i - 1] / p.lam) ** p.alpha))
        fj = 1 - math.exp(-((x[n - i] / p.lam) ** p.alpha))
        total += (2 * i - 1) * (math.log(fi) + math.log(1 - fj))
    return -n - total / n


class TestStatistic:
    def test_plotting_positions(self):
        p = WeibullParams(2.0, 3.0)
        n = 20
        x = quantile((np.arange(1, n + 1) - 0.5) / n, p)
        a2 = ad_statistic(x, p)
        assert abs(a2 - ad_oracle(x, p)) <= 1e-12
        assert a2 < 0.1
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert ad_statistic(np.sort(p.lam * rng.weibull(p.alpha, n)), p) > a2

    def test_matches_oracle_random(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            p = WeibullParams(rng.uniform(0.5, 5), rng.uniform(0.5, 5))
            x = p.lam * rng.weibull(p.alpha, int(rng.integers(3, 40)))
            assert_allclose(ad_statistic(x, p), ad_oracle(x, p), rtol=1e-10, atol=1e-12)

    def test_scale_invariance(self):
        x = np.array([0.3, 0.8, 1.1, 1.9, 2.4])
        p = WeibullParams(1.7, 1.2)
        assert_allclose(ad_statistic(2 * x, WeibullParams(1.7, 2.4)), ad_statistic(x, p), rtol=1e-13)

    def test_order_invariance(self):
        x = np.array([0.3, 0.8, 1.1, 1.9, 2.4])
        p = WeibullParams(1.7, 1.2)
        assert ad_statistic(x[::-1], p) == ad_statistic(x, p)

    def test_far_tail_is_clamped(self):
        p = WeibullParams(3.0, 1.0)
        a2 = ad_statistic([1e-9, 0.5, 1.0, 50.0], p)
        assert math.isfinite(a2) and a2 > 10

    def test_needs_three(self):
        with pytest.raises(ValueError):
            ad_statistic([1.0, 2.0], WeibullParams(1, 1))


class TestBootstrap:
    @pytest.mark.parametrize(
        "data, expected",
        [
            ((620, 632, 685, 822), (8.5582, 727.4088)),
            ((380, 416, 460, 596), (5.8113, 498.6429)),
            ((216, 146, 332, 400), (3.1457, 307.1342)),
        ],
    )
    def test_illustration(self, data, expected):
        res = ad_test(data, bootstrap_reps=500, seed=1)
        assert abs(res.fitted.alpha - expected[0]) <= 1e-3
        assert abs(res.fitted.lam - expected[1]) <= 1e-3
        assert not res.reject()
        assert res.decision().startswith("fail to reject")
        assert 0 <= res.p_value <= 1 and res.statistic >= 0

    def test_deterministic(self):
        a = ad_test([3.1, 1.2, 5.5, 2.2, 0.7], bootstrap_reps=200, seed=5)
        b = ad_test([3.1, 1.2, 5.5, 2.2, 0.7], bootstrap_reps=200, seed=5)
        assert a == b

    def test_p_value_is_exceedance_fraction(self):
        data = np.array([3.1, 1.2, 5.5, 2.2, 0.7, 4.0])
        res = ad_test(data, bootstrap_reps=50, seed=3)
        count = 0
        from weibull_alt.mle import fit_complete

        for b in range(50):
            sample = np.sort(res.fitted.lam * stream(3, 3, b).weibull(res.fitted.alpha, data.size))
            count += ad_statistic(sample, fit_complete(sample)) > res.statistic
        assert res.p_value == count / 50

    def test_outlier_lowers_p(self):
        rng = np.random.default_rng(4)
        clean = 2.0 * rng.weibull(2.5, 30)
        dirty = np.append(clean[:-1], 60.0)
        assert ad_test(dirty, 300, 0).p_value < ad_test(clean, 300, 0).p_value
        assert ad_test(dirty, 300, 0).reject()

    def test_calibration(self):
        """Under the null, rejections at 5% occur at roughly the nominal rate."""
        rejections = 0
        for trial in range(200):
            x = 1.5 * stream(99, trial).weibull(1.8, 25)
            rejections += ad_test(x, bootstrap_reps=200, seed=trial).p_value < 0.05
        assert 0.01 <= rejections / 200 <= 0.12

    def test_validation(self):
        with pytest.raises(ValueError):
            ad_test([1.0, 2.0, 3.0], bootstrap_reps=0)
        with pytest.raises(ValueError):
            ad_test([1.0, -2.0, 3.0])
        with pytest.raises(ValueError):
            ad_test([1.0, 2.0, 3.0], seed=-1)

    def test_record(self):
        rec = ad_test([3.1, 1.2, 5.5, 2.2], bootstrap_reps=20).as_record()
        assert set(rec) == {"n", "statistic", "p_value", "shape", "scale", "bootstrap_reps", "decision"}
