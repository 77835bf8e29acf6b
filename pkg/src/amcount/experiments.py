"""Seeded Monte Carlo experiments behind the CLI and the acceptance suite.

Every trial draws from its own generator, derived from the master seed
and the trial index, so results do not depend on batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from amcount.counter import (
    CounterConfig,
    advance_exponents,
    make_counter,
    space_bits_of_exponents,
)
from amcount.multi import MultiCounter, MultiCounterConfig, sparse_location_bits, sparse_location_bound
from amcount.stats import trial_rng, wilson_interval


@dataclass
class ErrorRow:
    trial: int
    counter: int
    true_count: int
    estimate: float
    rel_error: float
    failure: bool
    space_bits: int


@dataclass
class ErrorSummary:
    checks: int
    failures: int
    delta: float
    wilson_lo: float
    wilson_hi: float
    mean_space_bits: float

    @property
    def rate(self) -> float:
        return self.failures / self.checks if self.checks else 0.0

    @property
    def margin(self) -> float:
        return self.rate - self.wilson_lo

    @property
    def ok(self) -> bool:
        return self.rate <= self.delta + self.margin


def is_failure(estimate: float, true_count: int, epsilon: float) -> bool:
    """|N_hat - N| >= eps N; a zero count never fails."""
    return true_count > 0 and abs(estimate - true_count) >= epsilon * true_count


def error_trials(config: CounterConfig, counts: list[int], trials: int, seed: int,
                 density_threshold: float = 0.25, confidence: float = 0.99):
    """Run ``trials`` independent structures through the per-counter ``counts``.

    One counter uses an AmplifiedCounter, several use a MultiCounter.
    Yields ErrorRow objects; the final item is an ErrorSummary.
    """
    k = len(counts)
    checks = failures = 0
    space_total = 0
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        if k == 1:
            c = make_counter(config)
            c.add(counts[0], rng)
            estimates = [c.query()]
            bits = [c.space_bits()]
            space_total += bits[0]
        else:
            mc = MultiCounter(MultiCounterConfig(k, config.epsilon, config.delta, config.mode,
                                                 density_threshold))
            for i, n in enumerate(counts, start=1):
                mc.add(i, n, rng)
            estimates = [mc.query(i) for i in range(1, k + 1)]
            bits = [_counter_bits(mc, i) for i in range(1, k + 1)]
            space_total += mc.space_bits()
        for i, (n, est, b) in enumerate(zip(counts, estimates, bits), start=1):
            fail = is_failure(est, n, config.epsilon)
            rel = abs(est - n) / n if n else 0.0
            if n > 0:
                checks += 1
                failures += fail
            yield ErrorRow(trial, i, n, est, rel, fail, b)
    lo, hi = wilson_interval(failures, checks, confidence) if checks else (0.0, 0.0)
    yield ErrorSummary(checks, failures, config.delta, lo, hi, space_total / trials if trials else 0.0)


def _counter_bits(mc: MultiCounter, i: int) -> int:
    c = mc.counter(i)
    return 0 if c is None else c.space_bits()


def failure_rate(config: CounterConfig, n: int, trials: int, seed: int) -> ErrorSummary:
    """Failure statistics of a single amplified counter after n increments."""
    *_, summary = error_trials(config, [n], trials, seed)
    return summary


@dataclass
class SpaceRow:
    n: int
    trials: int
    mean_bits: float
    std_bits: float
    mean_stream_bits: float


def space_sweep(base_param: float, copies: int, log2_counts: list[int], trials: int,
                seed: int) -> list[SpaceRow]:
    """Final-state and mean-over-stream serialized size for N = 2^e."""
    rows = []
    for e in log2_counts:
        n = 2 ** e
        final = np.empty(trials)
        stream = np.empty(trials)
        for t in range(trials):
            rng = trial_rng(seed, t)
            x, bt = advance_exponents(np.zeros(copies, dtype=np.int64), base_param, n, rng,
                                      return_bit_time=True)
            final[t] = space_bits_of_exponents(x).sum()
            stream[t] = bt.sum() / n
        rows.append(SpaceRow(n, trials, float(final.mean()), float(final.std(ddof=1)) if trials > 1 else 0.0,
                             float(stream.mean())))
    return rows


def loglog_slope(rows: list[SpaceRow]) -> float:
    """Least-squares slope of mean bits against log2 log2 N."""
    x = np.log2(np.log2([r.n for r in rows]))
    y = np.array([r.mean_bits for r in rows])
    if len(rows) < 2:
        return math.nan
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class SparseRow:
    k: int
    t: int
    trials: int
    mean_location_bits: float
    max_location_bits: int
    bound: float
    within_bound: float
    header_bits: int = 1


def sparse_locations(k: int, t: int, trials: int, seed: int) -> SparseRow:
    """Gap-code size of t uniformly placed non-zero counters among k."""
    if not 0 <= t <= k:
        raise ValueError("need 0 <= t <= k")
    bound = sparse_location_bound(k, t)
    bits = []
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        idx = np.sort(rng.choice(k, size=t, replace=False)) + 1
        bits.append(sparse_location_bits(idx))
    bits = np.array(bits)
    return SparseRow(k, t, trials, float(bits.mean()), int(bits.max()), bound,
                     float(np.mean(bits <= bound)))


def split_counts(total: int, k: int, kind: str) -> list[int]:
    """Ways of dividing ``total`` increments among k counters."""
    if kind == "balanced":
        base, extra = divmod(total, k)
        return [base + (1 if i < extra else 0) for i in range(k)]
    if kind == "onehot":
        return [total] + [0] * (k - 1)
    if kind == "geometric":
        weights = 0.5 ** np.arange(k)
        raw = np.floor(total * weights / weights.sum()).astype(int)
        raw[0] += total - raw.sum()
        return [int(v) for v in raw]
    raise ValueError(f"unknown split {kind!r}")


def amortized_bound(config: CounterConfig, k: int, total: int, constant: float = 2.0) -> float:
    """C k m (log2 log2(4N/k) + log2(1/a) + 1): the per-counter cost after Jensen."""
    if total < k:
        raise ValueError("the amortized bound needs total >= k")
    loglog = math.log2(max(1.0, math.log2(4.0 * total / k)))
    return constant * k * config.copies * (loglog + math.log2(1.0 / config.base_param) + 1.0)


def amortized_space(config: CounterConfig, counts: list[int], trials: int, seed: int) -> float:
    """Mean total serialized size of k independent amplified counters."""
    totals = []
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        bits = 0
        for n in counts:
            c = make_counter(config)
            c.add(n, rng)
            bits += c.space_bits()
        totals.append(bits)
    return float(np.mean(totals))

