"""Morris-style approximate counters with amplification and space accounting.

A Morris counter stores an exponent X and, on each increment, bumps X
with probability (1+a)^-X.  The estimate ((1+a)^X - 1)/a is unbiased
with variance a*N*(N-1)/2, which is what both amplification modes are
sized from:

* ``chebyshev``: one copy with a = 2*eps^2*delta, so Chebyshev alone
  bounds the failure probability by delta.
* ``median``: an odd number m >= 48 ln(1/delta) of copies with
  a = eps^2/3, each failing with probability <= 1/3; the median fails
  only if half the copies do.

Space is measured as the length of a canonical serialization: the gamma
code of exponent+1 for every copy, concatenated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from amcount.coding import BitReader, BitWriter, gamma_length


class Mode(str, enum.Enum):
    CHEBYSHEV = "chebyshev"
    MEDIAN = "median"


@dataclass(frozen=True)
class CounterConfig:
    epsilon: float
    delta: float
    mode: Mode = Mode.MEDIAN

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must be in (0, 1/2), got {self.epsilon}")
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta must be in (0, 1/2), got {self.delta}")
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def base_param(self) -> float:
        if self.mode is Mode.CHEBYSHEV:
            return 2.0 * self.epsilon ** 2 * self.delta
        return self.epsilon ** 2 / 3.0

    @property
    def copies(self) -> int:
        if self.mode is Mode.CHEBYSHEV:
            return 1
        m = math.ceil(48.0 * math.log(1.0 / self.delta))
        return m if m % 2 == 1 else m + 1

    def describe(self) -> str:
        return f"epsilon={self.epsilon} delta={self.delta} mode={self.mode.value}"


def _uniform_open(rng: np.random.Generator, size=None):
    # (0, 1] so that log() is always finite
    return 1.0 - rng.random(size)


@dataclass
class MorrisCounter:
    exponent: int = 0
    base_param: float = 1.0

    def __post_init__(self) -> None:
        if self.exponent < 0:
            raise ValueError("exponent must be nonnegative")
        if not 0.0 < self.base_param <= 1.0:
            raise ValueError(f"base_param must be in (0, 1], got {self.base_param}")

    def increment_probability(self) -> float:
        return math.exp(-self.exponent * math.log1p(self.base_param))

    def increment(self, rng: np.random.Generator) -> MorrisCounter:
        """One probabilistic increment; a single uniform is compared in log space."""
        if self.exponent == 0:
            self.exponent = 1
            return self
        u = float(_uniform_open(rng))
        if math.log(u) <= -self.exponent * math.log1p(self.base_param):
            self.exponent += 1
        return self

    def add(self, count: int, rng: np.random.Generator) -> MorrisCounter:
        """Apply ``count`` increments at once (same law as ``count`` calls to increment)."""
        self.exponent = int(advance_exponents([self.exponent], self.base_param, count, rng)[0])
        return self

    def estimate(self) -> float:
        if self.exponent == 0:
            return 0.0
        a = self.base_param
        return ((1.0 + a) ** self.exponent - 1.0) / a

    def space_bits(self) -> int:
        return gamma_length(self.exponent + 1)


@dataclass
class AmplifiedCounter:
    """m independent Morris counters sharing a base; queried by median when m > 1."""

    copies: list[MorrisCounter]
    config: CounterConfig | None = None
    base_param: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.copies:
            raise ValueError("an amplified counter needs at least one copy")
        bases = {c.base_param for c in self.copies}
        if len(bases) != 1:
            raise ValueError("all copies must share the same base_param")
        self.base_param = bases.pop()
        m = len(self.copies)
        if self.config is not None:
            if self.config.mode is Mode.CHEBYSHEV and m != 1:
                raise ValueError("chebyshev mode uses exactly one copy")
        if m > 1 and m % 2 == 0:
            raise ValueError("median mode needs an odd number of copies")

    @classmethod
    def with_base(cls, base_param: float, m: int = 1) -> AmplifiedCounter:
        """Counter with an explicit base, outside any (eps, delta) configuration."""
        return cls([MorrisCounter(0, base_param) for _ in range(m)])

    @property
    def m(self) -> int:
        return len(self.copies)

    @property
    def exponents(self) -> list[int]:
        return [c.exponent for c in self.copies]

    def increment(self, rng: np.random.Generator) -> AmplifiedCounter:
        for c in self.copies:
            c.increment(rng)
        return self

    def add(self, count: int, rng: np.random.Generator) -> AmplifiedCounter:
        new = advance_exponents(self.exponents, self.base_param, count, rng)
        for c, x in zip(self.copies, new):
            c.exponent = int(x)
        return self

    def query(self) -> float:
        if self.m == 1:
            return self.copies[0].estimate()
        return float(np.median([c.estimate() for c in self.copies]))

    def space_bits(self) -> int:
        return sum(c.space_bits() for c in self.copies)

    def serialize(self) -> bytes:
        w = BitWriter()
        self.write_bits(w)
        return w.to_bytes()

    def write_bits(self, writer: BitWriter) -> None:
        for c in self.copies:
            writer.write_gamma(c.exponent + 1)

    @classmethod
    def read_bits(cls, reader: BitReader, base_param: float, m: int,
                  config: CounterConfig | None = None) -> AmplifiedCounter:
        copies = [MorrisCounter(reader.read_gamma() - 1, base_param) for _ in range(m)]
        return cls(copies, config)

    @classmethod
    def deserialize(cls, data: bytes, config: CounterConfig) -> AmplifiedCounter:
        return cls.read_bits(BitReader(data), config.base_param, config.copies, config)


def make_counter(config: CounterConfig) -> AmplifiedCounter:
    a = config.base_param
    return AmplifiedCounter([MorrisCounter(0, a) for _ in range(config.copies)], config)


def counter_space_bits(counter: AmplifiedCounter) -> int:
    return counter.space_bits()


def space_bits_of_exponents(exponents) -> np.ndarray:
    """Vectorized gamma length of exponent+1."""
    x = np.asarray(exponents, dtype=np.int64) + 1
    return 2 * (np.floor(np.log2(x)).astype(np.int64)) + 1


def exponent_pmf(base_param: float, n: int) -> np.ndarray:
    """Exact distribution of the exponent after ``n`` increments from zero.

    Entry x is P(X_n = x); computed by pushing the distribution through
    n single-increment transitions.
    """
    p = np.zeros(n + 1)
    p[0] = 1.0
    up = np.exp(-np.arange(n + 1) * math.log1p(base_param))
    for _ in range(n):
        moved = p * up
        p = p - moved
        p[1:] += moved[:-1]
    return p


def advance_exponents(start, base_param: float, count: int, rng: np.random.Generator,
                      return_bit_time: bool = False, chunk: int | None = None):
    """Apply ``count`` increments to each exponent in ``start``.

    Rather than drawing one uniform per increment, this draws, for every
    level y passed through, the geometric number of increments spent
    before the level is left (success probability (1+a)^-y).  Those
    waiting times are independent across levels, so the result has the
    same law as ``count`` sequential increments.  Levels are drawn in
    chunks sized from the expected final exponent; unused draws are
    discarded.

    With ``return_bit_time`` the second return value is, per copy, the
    sum over the ``count`` post-increment states of their gamma-coded
    size, i.e. ``count`` times the mean-over-stream space.  ``chunk``
    fixes the number of levels drawn per round (testing hook).
    """
    x = np.array(start, dtype=np.int64).reshape(-1).copy()
    remaining = np.full(x.shape, float(count))
    bit_time = np.zeros(x.shape)
    if count < 0:
        raise ValueError("count must be nonnegative")
    log_base = math.log1p(base_param)
    active = np.arange(x.size) if count > 0 else np.arange(0)
    while active.size:
        xa = x[active]
        r = remaining[active]
        growth = base_param * r * np.exp(-xa * log_base)
        k = chunk or int(np.ceil(np.max(np.log1p(growth)) / log_base * 1.1)) + 16
        levels = xa[:, None] + np.arange(k)[None, :]
        p = np.exp(-levels * log_base)
        with np.errstate(divide="ignore"):
            g = 1.0 + np.floor(np.log(_uniform_open(rng, levels.shape)) / np.log1p(-p))
        cum = np.cumsum(g, axis=1)
        steps = np.sum(cum <= r[:, None], axis=1)
        if return_bit_time:
            bit_time[active] += _chunk_bit_time(xa, cum, steps, r, k)
        rows = np.arange(active.size)
        consumed = np.where(steps > 0, cum[rows, np.maximum(steps - 1, 0)], 0.0)
        x[active] = xa + steps
        remaining[active] = r - consumed
        active = active[steps == k]
    if return_bit_time:
        return x, bit_time
    return x


def _chunk_bit_time(xa, cum, steps, r, k):
    # occupancy of state xa+e over this chunk's positions 1..r
    n_rows = xa.size
    e = np.arange(k + 1)[None, :]
    states = xa[:, None] + e
    start = np.empty((n_rows, k + 1))
    start[:, 0] = 1.0
    start[:, 1:] = cum
    end = np.empty((n_rows, k + 1))
    end[:, :k] = cum - 1.0
    end[:, k] = np.inf
    end = np.minimum(end, r[:, None])
    cont = steps == k
    end[cont, k] = start[cont, k]
    entered = e <= steps[:, None]
    occ = np.where(entered, np.maximum(end - start + 1.0, 0.0), 0.0)
    return np.sum(occ * space_bits_of_exponents(states), axis=1)
