"""Reference streaming algorithms as finite-state kernels, and their file format.

All builders take the input stream so kernels exist for exactly the input
values each step can see.

File format (UTF-8, one record per line, ``#`` starts a comment)::

    amcount-alg v1
    name exact_sum
    states 3
    init 1 0 0
    step 1 input 0
    <S rows of S probabilities>
    step 1 input 1
    <S rows>
    ...

Steps are 1-based and must appear in order; every (step, input) pair
carries a full S x S row-stochastic matrix.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from amcount.counter import exponent_pmf
from amcount.dist import DiscreteDist
from amcount.infocost import FiniteStateAlgorithm, ProductStream
from amcount.streams import HardStreamParams, marginal_supports

HEADER = "amcount-alg v1"


def uniform_bits(length: int) -> ProductStream:
    return ProductStream.iid(DiscreteDist.uniform([0, 1]), length)


def hard_product_stream(params: HardStreamParams) -> ProductStream:
    """The multi-scale hard distribution as a product of per-position laws."""
    return ProductStream([DiscreteDist.uniform(sup) for sup in marginal_supports(params)])


def _max_inputs(stream: ProductStream) -> list[int]:
    return [int(d.support.max()) for d in stream.steps]


def _shift_matrix(n_states: int, x: int) -> np.ndarray:
    K = np.zeros((n_states, n_states))
    K[np.arange(n_states), np.minimum(np.arange(n_states) + x, n_states - 1)] = 1.0
    return K


def trivial(stream: ProductStream) -> FiniteStateAlgorithm:
    """Remembers nothing."""
    kernels = [{int(x): np.ones((1, 1)) for x in d.support} for d in stream.steps]
    return FiniteStateAlgorithm(np.ones(1), kernels, "trivial")


def exact_sum(stream: ProductStream) -> FiniteStateAlgorithm:
    """Keeps the running sum exactly; states 0..max possible sum."""
    n_states = sum(_max_inputs(stream)) + 1
    init = np.zeros(n_states)
    init[0] = 1.0
    kernels = [{int(x): _shift_matrix(n_states, int(x)) for x in d.support} for d in stream.steps]
    return FiniteStateAlgorithm(init, kernels, "exact_sum")


def block_sum(stream: ProductStream, block_size: int, epsilon: float = 0.5) -> FiniteStateAlgorithm:
    """Block strategy for fair-bit streams.

    While every finished block summed to within (1 +- epsilon) * S/2 the
    state is just the exact count inside the current block.  The first
    block outside that range switches to exact mode, whose state is the
    running estimate: S/2 for each earlier block plus the exact sum from
    the deviating block on.

    States 0..C are in-block counts, C+1.. are exact-mode totals.
    """
    S = block_size
    if S < 2 or S % 2:
        raise ValueError("block_size must be an even integer >= 2")
    maxes = _max_inputs(stream)
    s = len(maxes)
    half = S // 2
    lo, hi = (1.0 - epsilon) * half, (1.0 + epsilon) * half
    in_block = max(sum(maxes[b:b + S]) for b in range(0, s, S)) if s else 0
    suffix = np.concatenate([np.cumsum(maxes[::-1])[::-1], [0]])
    exact_max = max(b * half + int(suffix[min(b * S, s)]) for b in range(s // S + 1))
    n_normal = in_block + 1
    n_states = n_normal + exact_max + 1

    def exact_state(v: int) -> int:
        return n_normal + min(v, exact_max)

    kernels = []
    for t, d in enumerate(stream.steps, start=1):
        step = {}
        boundary = t % S == 0
        for x in map(int, d.support):
            K = np.zeros((n_states, n_states))
            for c in range(n_normal):
                c2 = c + x
                if not boundary:
                    K[c, min(c2, in_block)] = 1.0
                elif lo <= c2 <= hi:
                    K[c, 0] = 1.0
                else:
                    K[c, exact_state((t // S - 1) * half + c2)] = 1.0
            for v in range(exact_max + 1):
                K[n_normal + v, exact_state(v + x)] = 1.0
            step[x] = K
        kernels.append(step)
    init = np.zeros(n_states)
    init[0] = 1.0
    return FiniteStateAlgorithm(init, kernels, f"block_sum({S})")


def block_sum_estimate(state: int, steps_done: int, block_size: int, n_normal: int) -> int:
    """Query answer of ``block_sum`` in a given state after ``steps_done`` steps."""
    if state >= n_normal:
        return state - n_normal
    return (steps_done // block_size) * (block_size // 2) + state


def morris_cap(base_param: float, total: int, tol: float = 1e-12) -> int:
    """Smallest exponent cap whose overflow probability after ``total`` increments is < tol."""
    pmf = exponent_pmf(base_param, total)
    tail = np.cumsum(pmf[::-1])[::-1]  # tail[c] = P(X >= c)
    above = np.nonzero(tail < tol)[0]
    # overflow means X > cap, i.e. X >= cap + 1
    return int(above[0]) - 1 if above.size else total


def morris_discretized(stream: ProductStream, base_param: float,
                       cap: int | None = None) -> FiniteStateAlgorithm:
    """Morris counter with the exponent truncated at ``cap`` (absorbing)."""
    if cap is None:
        cap = morris_cap(base_param, sum(_max_inputs(stream)))
    n_states = cap + 1
    P = np.zeros((n_states, n_states))
    for y in range(n_states):
        up = 1.0 if y == 0 else math.exp(-y * math.log1p(base_param))
        if y == cap:
            P[y, y] = 1.0
        else:
            P[y, y + 1] = up
            P[y, y] = 1.0 - up
    kernels = [{int(x): np.linalg.matrix_power(P, int(x)) for x in d.support} for d in stream.steps]
    init = np.zeros(n_states)
    init[0] = 1.0
    return FiniteStateAlgorithm(init, kernels, f"morris(a={base_param},cap={cap})")


def reference_algorithm(name: str, stream: ProductStream, **kw) -> FiniteStateAlgorithm:
    builders = {
        "trivial": trivial,
        "exact_sum": exact_sum,
        "block_sum": block_sum,
        "morris": morris_discretized,
    }
    try:
        build = builders[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(builders)}") from None
    return build(stream, **kw)


def write_algorithm(path, alg: FiniteStateAlgorithm) -> None:
    lines = [HEADER, f"name {alg.name}", f"states {alg.n_states}",
             "init " + " ".join(repr(float(p)) for p in alg.init)]
    for t, step in enumerate(alg.kernels, start=1):
        for x in sorted(step):
            lines.append(f"step {t} input {x}")
            lines += [" ".join(repr(float(v)) for v in row) for row in step[x]]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_algorithm(path) -> FiniteStateAlgorithm:
    raw = Path(path).read_text(encoding="utf-8").splitlines()
    lines = [ln.split("#", 1)[0].strip() for ln in raw]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != HEADER:
        raise ValueError(f"{path}: missing '{HEADER}' header")
    name = "custom"
    pos = 1
    if lines[pos].startswith("name "):
        name = lines[pos][5:].strip()
        pos += 1
    key, val = lines[pos].split(maxsplit=1)
    if key != "states":
        raise ValueError(f"{path}: expected 'states', got {key!r}")
    S = int(val)
    key, *vals = lines[pos + 1].split()
    if key != "init" or len(vals) != S:
        raise ValueError(f"{path}: bad init line")
    init = np.array([float(v) for v in vals])
    pos += 2
    kernels: list[dict[int, np.ndarray]] = []
    while pos < len(lines):
        tok = lines[pos].split()
        if len(tok) != 4 or tok[0] != "step" or tok[2] != "input":
            raise ValueError(f"{path}: expected 'step <t> input <x>', got {lines[pos]!r}")
        t, x = int(tok[1]), int(tok[3])
        if t == len(kernels) + 1:
            kernels.append({})
        elif t != len(kernels):
            raise ValueError(f"{path}: steps must appear in order (saw step {t})")
        rows = [[float(v) for v in ln.split()] for ln in lines[pos + 1:pos + 1 + S]]
        if len(rows) != S or any(len(r) != S for r in rows):
            raise ValueError(f"{path}: step {t} input {x} needs {S} rows of {S} entries")
        kernels[-1][x] = np.array(rows)
        pos += 1 + S
    return FiniteStateAlgorithm(init, kernels, name)
