"""Multi-scale hard input streams for a single counter and their k-fold versions.

The stream interleaves L scales.  Block i (1..T) contributes L consecutive
positions, one per scale; the slot for scale l holds Unif{0, B^l} when
B^l divides i-1 and 0 otherwise.  So scale l has T/B^l live slots, spaced
B^l * L positions apart starting at position l, and every sample sums to
at most T*L = n.

Positions are 1-based in this module.  Stream files are written 0-based
and say so in their header.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class HardStreamParams:
    B: int
    delta: float
    T: int
    L: int

    @property
    def n(self) -> int:
        return self.T * self.L

    def period(self, scale: int) -> int:
        return self.B ** scale * self.L

    def slots(self, scale: int) -> int:
        """Number of live (possibly non-zero) slots at ``scale``."""
        return self.T // self.B ** scale


def _largest_power_below(B: int, bound: float) -> int:
    T = 1
    while T * B < bound:
        T *= B
    return T


def hard_params(B: int, delta: float) -> HardStreamParams:
    """Parameters with T the largest power of B strictly below log_32(1/delta)."""
    if B < 2:
        raise ValueError(f"B must be at least 2, got {B}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    bound = -math.log2(delta) / 5.0
    T = _largest_power_below(B, bound)
    if T < B:
        raise ValueError(f"delta={delta} too large for B={B}: T={T} < B")
    L = round(math.log(T, B))
    assert B ** L == T
    return HardStreamParams(B, delta, T, L)


def hard_params_from_T(B: int, T: int) -> HardStreamParams:
    """Parameters for a chosen T (a power of B), with an admissible delta = 32^-(T+1).

    The returned delta underflows to 0.0 for T above ~200; it is kept
    only as a record, T is what the generators use.
    """
    if B < 2:
        raise ValueError(f"B must be at least 2, got {B}")
    L = 0
    t = 1
    while t < T:
        t *= B
        L += 1
    if t != T or L < 1:
        raise ValueError(f"T={T} is not a positive power of B={B} with T >= B")
    return HardStreamParams(B, 2.0 ** (-5.0 * (T + 1)), T, L)


def slot_position(block: int, scale: int, params: HardStreamParams) -> int:
    return (block - 1) * params.L + scale


def marginal_support(position: int, params: HardStreamParams) -> tuple[int, ...]:
    """Support of X_position: (0, B^l) for a live scale-l slot, else (0,)."""
    if not 1 <= position <= params.n:
        raise ValueError(f"position {position} outside [1, {params.n}]")
    block, scale = divmod(position - 1, params.L)
    scale += 1
    if block % params.B ** scale == 0:
        return (0, params.B ** scale)
    return (0,)


def marginal_supports(params: HardStreamParams) -> list[tuple[int, ...]]:
    return [marginal_support(p, params) for p in range(1, params.n + 1)]


def sample_hard_stream(params: HardStreamParams, rng: np.random.Generator) -> np.ndarray:
    """One draw of X_1..X_n (returned as a 0-based int array)."""
    out = np.zeros(params.n, dtype=np.int64)
    for scale in range(1, params.L + 1):
        step = params.period(scale)
        live = np.arange(scale - 1, params.n, step)
        coins = rng.integers(0, 2, size=live.size)
        out[live] = coins * params.B ** scale
    return out


def sample_kfold(params: HardStreamParams, k: int, rng: np.random.Generator) -> np.ndarray:
    """n batches of k independent draws; row i-1 is batch i."""
    if k < 1:
        raise ValueError("k must be positive")
    return np.stack([sample_hard_stream(params, rng) for _ in range(k)], axis=1)


def embed_single(single, k: int, rng: np.random.Generator,
                 params: HardStreamParams) -> tuple[np.ndarray, int]:
    """Place ``single`` at a uniform coordinate u (1-based); fill the rest with fresh draws."""
    single = np.asarray(single, dtype=np.int64)
    if single.shape != (params.n,):
        raise ValueError(f"expected a stream of length {params.n}")
    u = int(rng.integers(1, k + 1))
    batches = sample_kfold(params, k, rng)
    batches[:, u - 1] = single
    return batches, u


def index_floor(i: int, scale: int, params: HardStreamParams) -> int:
    """Position of the nearest scale-``scale`` live slot at or before position i."""
    _check_scale(scale, params)
    if not 1 <= i <= params.n:
        raise ValueError(f"position {i} outside [1, {params.n}]")
    if i < scale:
        raise ValueError(f"no scale-{scale} slot at or before position {i}")
    period = params.period(scale)
    return period * ((i - scale) // period) + scale


def index_ceil(j: int, scale: int, params: HardStreamParams) -> int:
    """Position of the j-th live slot of ``scale``."""
    _check_scale(scale, params)
    if not 1 <= j <= params.slots(scale):
        raise ValueError(f"slot ordinal {j} outside [1, {params.slots(scale)}]")
    return params.period(scale) * (j - 1) + scale


def _check_scale(scale: int, params: HardStreamParams) -> None:
    if not 1 <= scale <= params.L:
        raise ValueError(f"scale {scale} outside [1, {params.L}]")


def write_stream(path, values, params: HardStreamParams, seed: int) -> None:
    values = np.asarray(values)
    if values.ndim == 1:
        if values.sum() > params.n:
            raise ValueError("stream sum exceeds n")
    elif values.ndim == 2:
        if (values.sum(axis=0) > params.n).any():
            raise ValueError("a coordinate stream sum exceeds n")
    else:
        raise ValueError("values must be 1-D or 2-D")
    lines = [
        "# amcount-stream v1",
        f"# B={params.B} T={params.T} L={params.L} n={params.n} seed={seed}",
        f"# k={1 if values.ndim == 1 else values.shape[1]} indexing=0-based line order",
    ]
    if values.ndim == 1:
        lines += [str(int(v)) for v in values]
    else:
        lines += [",".join(str(int(v)) for v in row) for row in values]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_stream(path) -> tuple[dict[str, int], np.ndarray]:
    header: dict[str, int] = {}
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            for tok in line[1:].split():
                key, sep, val = tok.partition("=")
                if sep and val.lstrip("-").isdigit():
                    header[key] = int(val)
            continue
        rows.append([int(v) for v in line.split(",")])
    arr = np.array(rows, dtype=np.int64)
    if header.get("k", 1) == 1:
        arr = arr.reshape(-1)
    return header, arr
