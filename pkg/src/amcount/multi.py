"""k approximate counters behind increment(i) / query(i).

Two representations, switched one way:

* sparse: a strictly increasing list of the touched counter indices plus
  one amplified counter per touched index.  Serialized as gap-coded
  locations interleaved with the counters' exponent codes.
* dense: one amplified counter per index, allocated at switch time.

Bit layout of ``serialize`` (MSB first, zero padded to a byte):

    regime bit        0 = sparse, 1 = dense
    sparse payload    for each touched index, in increasing order:
                        gamma(index - previous index)   (previous = 0 initially)
                        gamma(exponent + 1) for each of the m copies
                      the payload ends where only zero padding remains
    dense payload     for i = 1..k: gamma(exponent + 1) for each of the m copies

``k``, epsilon, delta and the mode are static configuration and are not
part of the bit stream.  Counter indices are 1-based.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass

import numpy as np

from amcount.coding import BitReader, BitWriter, gamma_length
from amcount.counter import AmplifiedCounter, CounterConfig, Mode, make_counter


class Regime(str, enum.Enum):
    SPARSE = "sparse"
    DENSE = "dense"


@dataclass(frozen=True)
class MultiCounterConfig:
    k: int
    epsilon: float
    delta: float
    mode: Mode = Mode.MEDIAN
    density_threshold: float = 0.25

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not 0.0 < self.density_threshold <= 1.0:
            raise ValueError("density_threshold must be in (0, 1]")
        # validates epsilon, delta and mode
        object.__setattr__(self, "mode", self.counter_config.mode)

    @property
    def counter_config(self) -> CounterConfig:
        return CounterConfig(self.epsilon, self.delta, self.mode)


class MultiCounter:
    def __init__(self, config: MultiCounterConfig) -> None:
        self.config = config
        self._counter_config = config.counter_config
        self.regime = Regime.SPARSE
        self.sparse_index: list[int] = []
        self.sparse_bank: list[AmplifiedCounter] = []
        self.dense_bank: list[AmplifiedCounter] = []

    @property
    def k(self) -> int:
        return self.config.k

    def __repr__(self) -> str:
        return (f"MultiCounter(k={self.k}, regime={self.regime.value}, "
                f"touched={len(self.sparse_index) if self.regime is Regime.SPARSE else 'n/a'})")

    def _check_index(self, i: int) -> None:
        if not 1 <= i <= self.k:
            raise IndexError(f"counter index {i} outside [1, {self.k}]")

    def _find(self, i: int) -> AmplifiedCounter | None:
        if self.regime is Regime.DENSE:
            return self.dense_bank[i - 1]
        pos = bisect.bisect_left(self.sparse_index, i)
        if pos < len(self.sparse_index) and self.sparse_index[pos] == i:
            return self.sparse_bank[pos]
        return None

    def _touch(self, i: int) -> AmplifiedCounter:
        self._check_index(i)
        counter = self._find(i)
        if counter is not None:
            return counter
        counter = make_counter(self._counter_config)
        pos = bisect.bisect_left(self.sparse_index, i)
        self.sparse_index.insert(pos, i)
        self.sparse_bank.insert(pos, counter)
        if len(self.sparse_index) > self.config.density_threshold * self.k:
            self._switch_to_dense()
        return counter

    def _switch_to_dense(self) -> None:
        # existing counters move over untouched, so no estimate changes
        bank = [None] * self.k
        for i, c in zip(self.sparse_index, self.sparse_bank):
            bank[i - 1] = c
        self.dense_bank = [c if c is not None else make_counter(self._counter_config) for c in bank]
        self.sparse_index = []
        self.sparse_bank = []
        self.regime = Regime.DENSE

    def increment(self, i: int, rng: np.random.Generator) -> MultiCounter:
        self._touch(i).increment(rng)
        return self

    def add(self, i: int, count: int, rng: np.random.Generator) -> MultiCounter:
        """``count`` increments of counter ``i`` in one call."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        if count:
            self._touch(i).add(count, rng)
        return self

    def counter(self, i: int) -> AmplifiedCounter | None:
        """The amplified counter behind index i, or None if i was never touched."""
        self._check_index(i)
        return self._find(i)

    def query(self, i: int) -> float:
        self._check_index(i)
        counter = self._find(i)
        return 0.0 if counter is None else counter.query()

    def nonzero_count(self) -> int | None:
        """Touched counters in the sparse regime; None once dense."""
        return len(self.sparse_index) if self.regime is Regime.SPARSE else None

    def location_bits(self) -> int:
        if self.regime is Regime.DENSE:
            return 0
        return sparse_location_bits(self.sparse_index)

    def space_bits(self) -> int:
        if self.regime is Regime.DENSE:
            return 1 + sum(c.space_bits() for c in self.dense_bank)
        return 1 + self.location_bits() + sum(c.space_bits() for c in self.sparse_bank)

    def serialize(self) -> bytes:
        w = BitWriter()
        if self.regime is Regime.DENSE:
            w.write_bit(1)
            for c in self.dense_bank:
                c.write_bits(w)
        else:
            w.write_bit(0)
            prev = 0
            for i, c in zip(self.sparse_index, self.sparse_bank):
                w.write_gamma(i - prev)
                prev = i
                c.write_bits(w)
        return w.to_bytes()

    @classmethod
    def deserialize(cls, data: bytes, config: MultiCounterConfig) -> MultiCounter:
        cc = config.counter_config
        r = BitReader(data)
        mc = cls(config)
        if r.read_bit():
            mc.regime = Regime.DENSE
            mc.dense_bank = [AmplifiedCounter.read_bits(r, cc.base_param, cc.copies, cc)
                             for _ in range(config.k)]
            return mc
        prev = 0
        while not r.remaining_is_padding():
            prev += r.read_gamma()
            mc.sparse_index.append(prev)
            mc.sparse_bank.append(AmplifiedCounter.read_bits(r, cc.base_param, cc.copies, cc))
        return mc


def sparse_location_bits(indices) -> int:
    """Gap-code size of a strictly increasing list of 1-based indices."""
    total = 0
    prev = 0
    for i in indices:
        total += gamma_length(int(i) - prev)
        prev = int(i)
    return total


def sparse_location_bound(k: int, t: int) -> float:
    """Location budget 4 t log2(2k/t) used to check the sparse encoding."""
    if t == 0:
        return 0.0
    return 4.0 * t * np.log2(2.0 * k / t)
