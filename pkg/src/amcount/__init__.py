"""Amortized approximate counting and lower-bound verification tools."""

from amcount.counter import (
    AmplifiedCounter,
    CounterConfig,
    MorrisCounter,
    make_counter,
)
from amcount.multi import MultiCounter, MultiCounterConfig

__all__ = [
    "AmplifiedCounter",
    "CounterConfig",
    "MorrisCounter",
    "MultiCounter",
    "MultiCounterConfig",
    "make_counter",
]

__version__ = "0.1.0"
