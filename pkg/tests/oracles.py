"""Independent reference computations used by the tests.

Nothing here goes through the package's own pushforward or CMI code.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def entropy_bits(p) -> float:
    p = np.asarray(p, dtype=float).reshape(-1)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def cmi_by_entropies(joint: np.ndarray) -> float:
    """I(C; X | A) for a joint indexed [a, x, c], via H(A,X)+H(A,C)-H(A)-H(A,X,C)."""
    return (entropy_bits(joint.sum(axis=2)) + entropy_bits(joint.sum(axis=1))
            - entropy_bits(joint.sum(axis=(1, 2))) - entropy_bits(joint))


def brute_force_ic(alg, stream) -> tuple[float, np.ndarray]:
    """Enumerate every input sequence; per sequence the state law is a product of kernels."""
    s = len(stream)
    S = alg.n_states
    supports = [list(map(int, d.support)) for d in stream.steps]
    probs = [dict(zip(map(int, d.support), d.pmf)) for d in stream.steps]
    terms = np.zeros((s, s))
    joints = {(j, i): np.zeros((S, len(supports[j - 1]), S))
              for i in range(1, s + 1) for j in range(1, i + 1)}
    for xs in itertools.product(*supports):
        px = math.prod(probs[t][x] for t, x in enumerate(xs))
        Ks = [alg.kernels[t][x] for t, x in enumerate(xs)]
        prefix = [np.asarray(alg.init, dtype=float)]
        for K in Ks:
            prefix.append(prefix[-1] @ K)
        for j in range(1, s + 1):
            xpos = supports[j - 1].index(xs[j - 1])
            T = np.eye(S)
            for i in range(j, s + 1):
                T = T @ Ks[i - 1]
                # P(M_{j-1}=a, M_i=c | x) = prefix[j-1][a] * T[a, c]
                joints[(j, i)][:, xpos, :] += px * prefix[j - 1][:, None] * T
    for (j, i), joint in joints.items():
        terms[i - 1, j - 1] = cmi_by_entropies(joint)
    return float(terms.sum()), terms


def path_enumeration_ic(alg, stream) -> float:
    """Full joint over inputs and the whole state path; tiny instances only."""
    s = len(stream)
    S = alg.n_states
    supports = [list(map(int, d.support)) for d in stream.steps]
    probs = [dict(zip(map(int, d.support), d.pmf)) for d in stream.steps]
    total = 0.0
    # full[x_1..x_s, m_0..m_s]
    shape = tuple(len(sp) for sp in supports) + (S,) * (s + 1)
    full = np.zeros(shape)
    for xidx in itertools.product(*(range(len(sp)) for sp in supports)):
        xs = [supports[t][k] for t, k in enumerate(xidx)]
        px = math.prod(probs[t][x] for t, x in enumerate(xs))
        for path in itertools.product(range(S), repeat=s + 1):
            p = px * alg.init[path[0]]
            for t in range(s):
                p *= alg.kernels[t][xs[t]][path[t], path[t + 1]]
            full[xidx + path] = p
    n_axes = full.ndim
    for i in range(1, s + 1):
        for j in range(1, i + 1):
            keep = (s + j - 1, j - 1, s + i)  # M_{j-1}, X_j, M_i
            drop = tuple(ax for ax in range(n_axes) if ax not in keep)
            joint = full.sum(axis=drop)
            # sum() keeps remaining axes in increasing order; reorder to (a, x, c)
            order = sorted(keep)
            joint = np.transpose(joint, [order.index(ax) for ax in keep])
            total += cmi_by_entropies(joint)
    return total


def exact_binomial_tail(k: int, n: int, p: float) -> float:
    """P(Bin(n, p) >= k), summed term by term."""
    return sum(math.comb(n, r) * p ** r * (1 - p) ** (n - r) for r in range(k, n + 1))


def interleaved_layout(params) -> dict[int, tuple[int, int]]:
    """Stream position -> (scale, inner index) by interleaving Y_{1,i}, ..., Y_{L,i} for i = 1..T."""
    layout = {}
    pos = 0
    for i in range(1, params.T + 1):
        for scale in range(1, params.L + 1):
            pos += 1
            layout[pos] = (scale, i)
    return layout


def slot_positions(scale: int, params) -> list[int]:
    """Positions carrying a random Unif{0, B^scale} entry: B^scale divides (i - 1)."""
    return sorted(pos for pos, (sc, i) in interleaved_layout(params).items()
                  if sc == scale and (i - 1) % params.B ** scale == 0)


def nearest_slot_before(i: int, scale: int, params) -> int | None:
    before = [pos for pos in slot_positions(scale, params) if pos <= i]
    return before[-1] if before else None
