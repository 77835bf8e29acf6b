import math

import numpy as np
import pytest
from statsmodels.stats.proportion import proportion_confint

from amcount.stats import failure_rate_ok, trial_rng, wilson_interval
from oracles import exact_binomial_tail


@pytest.mark.parametrize("k,n", [(0, 10), (1, 10), (5, 10), (10, 10), (3, 137), (480, 10000)])
def test_wilson_matches_statsmodels(k, n):
    lo, hi = wilson_interval(k, n, 0.99)
    ref_lo, ref_hi = proportion_confint(k, n, alpha=0.01, method="wilson")
    assert lo == pytest.approx(ref_lo, abs=1e-12)
    assert hi == pytest.approx(ref_hi, abs=1e-12)


@pytest.mark.parametrize("n", [5, 12, 30])
def test_wilson_coverage_by_binomial_tail(n):
    # coverage of the 99% interval, summed exactly over the binomial law
    for p in (0.05, 0.2, 0.5):
        cover = 0.0
        for k in range(n + 1):
            lo, hi = wilson_interval(k, n, 0.99)
            if lo <= p <= hi:
                cover += exact_binomial_tail(k, n, p) - exact_binomial_tail(k + 1, n, p)
        assert cover >= 0.95


def test_pass_rule():
    # 480 failures in 10^4 at delta 0.05 passes; 700 does not
    assert failure_rate_ok(480, 10000, 0.05)
    assert not failure_rate_ok(700, 10000, 0.05)


def test_invalid_input():
    with pytest.raises(ValueError):
        wilson_interval(3, 2)
    with pytest.raises(ValueError):
        wilson_interval(1, 0)


def test_trial_rng_independent_of_order():
    a = trial_rng(7, 3).random(4)
    trial_rng(7, 2).random(100)
    b = trial_rng(7, 3).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, trial_rng(7, 4).random(4))
    assert math.isfinite(a.sum())
