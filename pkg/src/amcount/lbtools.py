"""Objects from the lower-bound arguments: the two-sided spread functional f,
convolution, the multiplicative-gap sequence N(i), and greedy codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from amcount.dist import DiscreteDist

# gap checks and N(i) are restricted to epsilon in (0, EPS_MAX)
EPS_MAX = Fraction(1, 4)


def f_functional(P: DiscreteDist, spread: float) -> float:
    """max over thresholds L of min(P(X <= L), P(X >= L + spread)); 0 if never positive.

    Between two support points the left mass is constant and the right
    mass can only shrink, so thresholds at support points suffice.
    """
    if spread < 0:
        raise ValueError(f"spread must be nonnegative, got {spread}")
    left = np.cumsum(P.pmf)
    # right[k] = P(X >= support[k] + spread)
    total_from = np.concatenate([np.cumsum(P.pmf[::-1])[::-1], [0.0]])
    idx = np.searchsorted(P.support, P.support + spread, side="left")
    right = total_from[idx]
    best = float(np.max(np.minimum(left, right)))
    return max(best, 0.0)


def convolve(P: DiscreteDist, Q: DiscreteDist) -> DiscreteDist:
    """Law of X + Y for independent X ~ P, Y ~ Q."""
    sums = (P.support[:, None] + Q.support[None, :]).reshape(-1)
    probs = (P.pmf[:, None] * Q.pmf[None, :]).reshape(-1)
    vals, inv = np.unique(sums, return_inverse=True)
    pmf = np.zeros(vals.size)
    np.add.at(pmf, inv, probs)
    # one renormalization absorbs float drift from the products
    return DiscreteDist(vals, pmf / pmf.sum())


@dataclass
class FLemmaResult:
    product_lhs: float
    product_rhs: float
    halving_lhs: float
    halving_rhs: float
    tol: float = 1e-12

    @property
    def product_ok(self) -> bool:
        return self.product_lhs >= self.product_rhs - self.tol

    @property
    def halving_ok(self) -> bool:
        return self.halving_lhs >= self.halving_rhs - self.tol

    @property
    def ok(self) -> bool:
        return self.product_ok and self.halving_ok


def f_lemma_check(P: DiscreteDist, Q: DiscreteDist, spread1: float, spread2: float,
                  tol: float = 1e-12) -> FLemmaResult:
    """Check f(P*Q, d1+d2) >= f(P,d1) f(Q,d2) and f(P*Q, d1) >= f(P,d1)/2."""
    PQ = convolve(P, Q)
    return FLemmaResult(
        product_lhs=f_functional(PQ, spread1 + spread2),
        product_rhs=f_functional(P, spread1) * f_functional(Q, spread2),
        halving_lhs=f_functional(PQ, spread1),
        halving_rhs=f_functional(P, spread1) / 2.0,
        tol=tol,
    )


def random_dist(rng: np.random.Generator, max_support: int = 8, span: int = 20) -> DiscreteDist:
    size = int(rng.integers(1, max_support + 1))
    support = np.sort(rng.choice(np.arange(-span, span + 1), size=size, replace=False))
    w = rng.exponential(size=size)
    return DiscreteDist(support, w / w.sum())


@dataclass
class FLemmaReport:
    instances: int = 0
    min_product_slack: float = float("inf")
    min_halving_slack: float = float("inf")
    min_f_at_zero: float = float("inf")
    violations: list[str] = field(default_factory=list)


def f_lemma_suite(instances: int, rng: np.random.Generator, max_support: int = 8,
                  tol: float = 1e-12) -> FLemmaReport:
    report = FLemmaReport()
    for n in range(instances):
        P = random_dist(rng, max_support)
        Q = random_dist(rng, max_support)
        d1, d2 = (float(v) for v in rng.integers(0, 15, size=2))
        res = f_lemma_check(P, Q, d1, d2, tol)
        report.instances += 1
        report.min_product_slack = min(report.min_product_slack, res.product_lhs - res.product_rhs)
        report.min_halving_slack = min(report.min_halving_slack, res.halving_lhs - res.halving_rhs)
        f0 = min(f_functional(P, 0.0), f_functional(Q, 0.0))
        report.min_f_at_zero = min(report.min_f_at_zero, f0)
        if not res.product_ok:
            report.violations.append(f"instance {n}: product inequality")
        if not res.halving_ok:
            report.violations.append(f"instance {n}: halving inequality")
        if f0 < 0.5 - tol:
            report.violations.append(f"instance {n}: f(., 0) = {f0} < 1/2")
    return report


def _exact_eps(eps) -> Fraction:
    # decimal literals are taken at face value: 0.1 means 1/10
    value = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    if not 0 < value < EPS_MAX:
        raise ValueError(f"epsilon must be in (0, {EPS_MAX}), got {eps}")
    return value


def gap_sequence(eps, i: int) -> int:
    """N(i) = ceil((exp(4 i eps) - 1) / eps), exactly, for any size of i."""
    if i < 1:
        raise ValueError("i must be a positive integer")
    e = _exact_eps(eps)
    exponent = 4 * i * e
    digits = int(float(exponent) / math.log(10)) + 40
    with localcontext() as ctx:
        ctx.prec = digits
        x = Decimal(exponent.numerator) / Decimal(exponent.denominator)
        val = (x.exp() - 1) / (Decimal(e.numerator) / Decimal(e.denominator))
        return int(val.to_integral_value(rounding=ROUND_CEILING))


def gap_slack(eps, i: int) -> Fraction:
    """(1 - eps) N(i+1) - (1 + eps) N(i), exactly."""
    e = _exact_eps(eps)
    return (1 - e) * gap_sequence(eps, i + 1) - (1 + e) * gap_sequence(eps, i)


def gap_count(eps, n: int, k: int) -> int:
    """q = floor(ln(1 + n eps / k) / (4 eps)): how many N(i) keep k counters' total <= n."""
    e = float(_exact_eps(eps))
    return int(math.floor(math.log1p(n * e / k) / (4.0 * e)))


@dataclass
class GapReport:
    epsilon: float
    q: int
    min_slack: float
    argmin: int
    guaranteed: float

    @property
    def ok(self) -> bool:
        return self.q < 2 or self.min_slack > 0

    @property
    def meets_guarantee(self) -> bool:
        return self.q < 2 or self.min_slack >= self.guaranteed - 1e-9


def verify_gaps(eps, q: int | None = None, n: int | None = None, k: int | None = None) -> GapReport:
    """Check (1-eps) N(i+1) > (1+eps) N(i) for 1 <= i < q.

    Give ``q`` directly or ``n`` and ``k`` to use ``gap_count``.
    """
    e = _exact_eps(eps)
    if q is None:
        if n is None or k is None:
            raise ValueError("give q, or both n and k")
        q = gap_count(eps, n, k)
    best, arg = None, 0
    prev = gap_sequence(eps, 1) if q >= 2 else 0
    for i in range(1, q):
        nxt = gap_sequence(eps, i + 1)
        slack = (1 - e) * nxt - (1 + e) * prev
        if best is None or slack < best:
            best, arg = slack, i
        prev = nxt
    return GapReport(float(e), q, float(best) if best is not None else math.inf, arg,
                     float(2 - 4 * e))


# -- codes -------------------------------------------------------------------

def hamming_distance(u, v) -> int:
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError("words must have equal length")
    return int(np.count_nonzero(u != v))


def hamming_ball_volume(q: int, k: int, radius: int) -> int:
    return sum(math.comb(k, i) * (q - 1) ** i for i in range(radius + 1))


def gv_bound(q: int, k: int, d: int) -> Fraction:
    """q^k / sum_{i<d} C(k,i) (q-1)^i as an exact rational."""
    return Fraction(q ** k, hamming_ball_volume(q, k, d - 1))


@dataclass
class Code:
    q: int
    k: int
    d: int
    words: np.ndarray
    seed: int | None = None
    exhaustive: bool = False
    visited: int = 0

    def __len__(self) -> int:
        return len(self.words)

    def min_distance(self) -> int | None:
        """Exact minimum pairwise distance (None for fewer than two words)."""
        W = self.words
        if len(W) < 2:
            return None
        best = self.k
        for a in range(len(W) - 1):
            dist = np.count_nonzero(W[a + 1:] != W[a], axis=1)
            best = min(best, int(dist.min()))
        return best

    def verify(self) -> bool:
        if len({tuple(w) for w in self.words.tolist()}) != len(self.words):
            return False
        md = self.min_distance()
        return md is None or md >= self.d

    def certificate_holds(self) -> bool:
        """Every visited word lies within d-1 of a code word, so |C| * V(d-1) >= visited."""
        return len(self) * hamming_ball_volume(self.q, self.k, self.d - 1) >= self.visited


ENUMERATION_LIMIT = 1 << 12


def gv_greedy(q: int, k: int, d: int, seed: int = 0, max_candidates: int = 20000) -> Code:
    """Greedy code: scan candidate words in a seeded random order, keep those at
    distance >= d from every word kept so far.

    When q^k is small the whole space is scanned, which guarantees the
    Gilbert-Varshamov size.  Otherwise ``max_candidates`` uniformly random
    words are scanned and only the constructed size is claimed.
    """
    if q < 2 or k < 1 or not 1 <= d <= k:
        raise ValueError(f"need q > 1, k >= 1 and 1 <= d <= k (got q={q}, k={k}, d={d})")
    rng = np.random.default_rng(seed)
    space = q ** k
    if space <= ENUMERATION_LIMIT:
        order = rng.permutation(space)
        candidates = _words_from_ranks(order, q, k)
        exhaustive = True
    else:
        candidates = rng.integers(0, q, size=(max_candidates, k))
        exhaustive = False
    kept = np.empty((0, k), dtype=np.int64)
    for w in candidates:
        if kept.shape[0]:
            if np.count_nonzero(kept != w, axis=1).min() < d:
                continue
        kept = np.vstack([kept, w[None, :]])
    return Code(q, k, d, kept, seed, exhaustive, len(candidates))


def _words_from_ranks(ranks: np.ndarray, q: int, k: int) -> np.ndarray:
    out = np.empty((ranks.size, k), dtype=np.int64)
    r = ranks.copy()
    for pos in range(k - 1, -1, -1):
        out[:, pos] = r % q
        r //= q
    return out


def write_code(path, code: Code) -> None:
    lines = [f"# q={code.q} k={code.k} d={code.d} size={len(code)} seed={code.seed}"]
    lines += [",".join(str(int(s)) for s in w) for w in code.words]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
