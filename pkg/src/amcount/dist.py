"""Finite-support integer distributions."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

NORMALIZATION_TOL = 1e-12


class NormalizationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    support: np.ndarray
    pmf: np.ndarray

    def __post_init__(self) -> None:
        support = np.asarray(self.support, dtype=np.int64).reshape(-1)
        pmf = np.asarray(self.pmf, dtype=float).reshape(-1)
        if support.size == 0 or support.shape != pmf.shape:
            raise ValueError("support and pmf must be non-empty and aligned")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(pmf < 0) or not np.all(np.isfinite(pmf)):
            raise NormalizationError("probabilities must be finite and nonnegative")
        if abs(pmf.sum() - 1.0) > NORMALIZATION_TOL:
            raise NormalizationError(f"probabilities sum to {float(pmf.sum()):.17g}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "pmf", pmf)

    @classmethod
    def point(cls, value: int) -> DiscreteDist:
        return cls(np.array([value]), np.array([1.0]))

    @classmethod
    def uniform(cls, values: Iterable[int]) -> DiscreteDist:
        vals = np.unique(np.asarray(list(values), dtype=np.int64))
        return cls(vals, np.full(vals.size, 1.0 / vals.size))

    @classmethod
    def from_mapping(cls, masses: Mapping[int, float]) -> DiscreteDist:
        items = sorted(masses.items())
        return cls(np.array([k for k, _ in items]), np.array([v for _, v in items]))

    @classmethod
    def from_samples(cls, support, weights) -> DiscreteDist:
        """Merge duplicate support points and renormalize nonnegative weights."""
        support = np.asarray(support, dtype=np.int64)
        weights = np.asarray(weights, dtype=float)
        vals, inv = np.unique(support, return_inverse=True)
        w = np.zeros(vals.size)
        np.add.at(w, inv, weights)
        return cls(vals, w / w.sum())

    def __len__(self) -> int:
        return self.support.size

    def __repr__(self) -> str:
        pairs = ", ".join(f"{s}: {p:.6g}" for s, p in zip(self.support, self.pmf))
        return f"DiscreteDist({{{pairs}}})"

    def cdf_at(self, x: float) -> float:
        """P(X <= x)."""
        return float(self.pmf[self.support <= x].sum())

    def tail_from(self, x: float) -> float:
        """P(X >= x)."""
        return float(self.pmf[self.support >= x].sum())

    def mean(self) -> float:
        return float(np.dot(self.support, self.pmf))

    def shift(self, offset: int) -> DiscreteDist:
        return DiscreteDist(self.support + offset, self.pmf)
