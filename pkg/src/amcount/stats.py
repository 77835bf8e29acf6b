"""Seed derivation and binomial confidence intervals for Monte Carlo runs."""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial.

    The trial index is mixed into the master seed through numpy's
    SeedSequence spawn keys, so streams are reproducible and do not
    depend on how trials are scheduled.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def wilson_interval(successes: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}], got {successes}")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    p = successes / trials
    z2n = z * z / trials
    center = (p + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    return max(0.0, center - half), min(1.0, center + half)


def failure_rate_ok(failures: int, trials: int, delta: float, confidence: float = 0.99) -> bool:
    """Whether an observed failure count is consistent with a rate <= delta.

    Passes iff ``failures/trials <= delta + margin`` with margin the
    distance from the point estimate down to the Wilson lower bound,
    i.e. iff the lower bound does not exceed ``delta``.
    """
    lo, _ = wilson_interval(failures, trials, confidence)
    return lo <= delta
