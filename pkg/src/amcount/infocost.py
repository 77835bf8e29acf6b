"""Exact information cost of finite-state streaming algorithms.

An algorithm is an initial state distribution plus, for every step t and
every input value x in that step's support, a row-stochastic S x S
matrix K_t[x] (its internal randomness is folded into the rows).  Inputs
are independent across steps.  The information cost is

    IC = sum_{i=1..s} sum_{j=1..i} I(M_i ; X_j | M_{j-1})

and every term is computed from the exact joint law of
(M_{j-1}, X_j, M_i): start from P(M_{j-1}) x P(X_j) x K_j, then push the
last coordinate through the input-averaged kernels of steps j+1..i.

All information quantities are in bits.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from amcount.dist import DiscreteDist, NormalizationError

ROW_TOL = 1e-12
JOINT_TOL = 1e-9


@dataclass
class FiniteStateAlgorithm:
    init: np.ndarray
    kernels: list[dict[int, np.ndarray]]
    name: str = "custom"

    def __post_init__(self) -> None:
        self.init = np.asarray(self.init, dtype=float)
        S = self.init.size
        if self.init.ndim != 1 or S == 0:
            raise ValueError("init must be a non-empty probability vector")
        if np.any(self.init < 0) or abs(self.init.sum() - 1.0) > ROW_TOL:
            raise NormalizationError("init is not a probability vector")
        checked = []
        for t, step in enumerate(self.kernels, start=1):
            if not step:
                raise ValueError(f"step {t} has no kernels")
            out = {}
            for x, mat in step.items():
                mat = np.asarray(mat, dtype=float)
                if mat.shape != (S, S):
                    raise ValueError(f"step {t} input {x}: kernel shape {mat.shape}, expected {(S, S)}")
                if np.any(mat < 0) or np.max(np.abs(mat.sum(axis=1) - 1.0)) > ROW_TOL:
                    raise NormalizationError(f"step {t} input {x}: rows must be probability vectors")
                out[int(x)] = mat
            checked.append(out)
        self.kernels = checked

    @property
    def n_states(self) -> int:
        return self.init.size

    @property
    def n_steps(self) -> int:
        return len(self.kernels)

    def relabel(self, perm: Sequence[int]) -> FiniteStateAlgorithm:
        """Same algorithm with state s renamed perm[s]."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        init = self.init[inv]
        kernels = [{x: K[np.ix_(inv, inv)] for x, K in step.items()} for step in self.kernels]
        return FiniteStateAlgorithm(init, kernels, self.name)


@dataclass
class ProductStream:
    steps: list[DiscreteDist] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    @classmethod
    def iid(cls, dist: DiscreteDist, length: int) -> ProductStream:
        return cls([dist] * length)


def _step_tensor(alg: FiniteStateAlgorithm, stream: ProductStream, t: int):
    """(q, K) for 1-based step t: input pmf and the aligned (V, S, S) kernel stack."""
    d = stream.steps[t - 1]
    kernels = alg.kernels[t - 1]
    try:
        K = np.stack([kernels[int(x)] for x in d.support])
    except KeyError as exc:
        raise ValueError(f"step {t}: no kernel for input {exc.args[0]}") from None
    return d.pmf, K


def _check_shapes(alg: FiniteStateAlgorithm, stream: ProductStream) -> None:
    if alg.n_steps != len(stream):
        raise ValueError(f"algorithm has {alg.n_steps} steps, stream has {len(stream)}")


def averaged_kernels(alg: FiniteStateAlgorithm, stream: ProductStream) -> list[np.ndarray]:
    out = []
    for t in range(1, len(stream) + 1):
        q, K = _step_tensor(alg, stream, t)
        out.append(np.einsum("v,vab->ab", q, K))
    return out


def propagate(alg: FiniteStateAlgorithm, stream: ProductStream) -> np.ndarray:
    """Row i is the exact law of M_i, i = 0..s."""
    _check_shapes(alg, stream)
    rows = [alg.init]
    for A in averaged_kernels(alg, stream):
        rows.append(rows[-1] @ A)
    return np.array(rows)


def pairwise_joint(alg: FiniteStateAlgorithm, stream: ProductStream, j: int, i: int) -> np.ndarray:
    """Joint law of (M_{j-1}, X_j, M_i) as an (S, V_j, S) array."""
    _check_shapes(alg, stream)
    s = len(stream)
    if not 1 <= j <= i <= s:
        raise ValueError(f"need 1 <= j <= i <= {s}, got j={j}, i={i}")
    marg = propagate(alg, stream)
    avg = averaged_kernels(alg, stream)
    joint = _initial_joint(alg, stream, marg[j - 1], j)
    for t in range(j + 1, i + 1):
        joint = joint @ avg[t - 1]
    return joint


def _initial_joint(alg, stream, p_prev: np.ndarray, j: int) -> np.ndarray:
    q, K = _step_tensor(alg, stream, j)
    # joint[m, x, m'] = P(M_{j-1}=m) P(X_j=x) K_j[x][m, m']
    return p_prev[:, None, None] * q[None, :, None] * np.transpose(K, (1, 0, 2))


def _xlogx_ratio(num: np.ndarray, den: np.ndarray, weight: np.ndarray) -> float:
    mask = weight > 0
    return float(np.sum(weight[mask] * np.log2(num[mask] / den[mask])))


def cond_mutual_info(joint: np.ndarray) -> float:
    """I(C ; B | A) in bits for a joint array indexed [a, b, c].

    With the layout of ``pairwise_joint`` this is I(M_i ; X_j | M_{j-1}).
    """
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 3:
        raise ValueError("joint must be a 3-D array")
    if np.any(joint < -JOINT_TOL) or abs(joint.sum() - 1.0) > JOINT_TOL:
        raise NormalizationError(f"joint sums to {joint.sum()!r}, not 1")
    joint = np.clip(joint, 0.0, None)
    p_a = joint.sum(axis=(1, 2))
    p_ab = joint.sum(axis=2)
    p_ac = joint.sum(axis=1)
    num = joint * p_a[:, None, None]
    den = p_ab[:, :, None] * p_ac[:, None, :]
    value = _xlogx_ratio(num, den, joint)
    if -1e-12 < value < 0.0:
        value = 0.0
    return value


def information_cost(alg: FiniteStateAlgorithm, stream: ProductStream,
                     return_terms: bool = False):
    """Total IC; with ``return_terms`` also the (s, s) matrix terms[i-1, j-1]."""
    _check_shapes(alg, stream)
    s = len(stream)
    marg = propagate(alg, stream)
    avg = averaged_kernels(alg, stream)
    terms = np.zeros((s, s))
    for j in range(1, s + 1):
        joint = _initial_joint(alg, stream, marg[j - 1], j)
        for i in range(j, s + 1):
            if i > j:
                joint = joint @ avg[i - 1]
            terms[i - 1, j - 1] = cond_mutual_info(joint)
    # fixed summation order keeps totals reproducible
    total = float(sum(float(terms[i, : i + 1].sum()) for i in range(s)))
    if return_terms:
        return total, terms
    return total


def projected_cost(alg: FiniteStateAlgorithm, stream: ProductStream) -> int:
    """Rough elementary-operation count of ``information_cost``: s^2 * S^2 * max support."""
    s = len(stream)
    V = max((len(d) for d in stream.steps), default=1)
    return s * s * alg.n_states ** 2 * V


def entropy(p) -> float:
    p = _as_pmf(p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def kl(p, q) -> float:
    p, q = _aligned(p, q)
    mask = p > 0
    if np.any(q[mask] == 0):
        raise ValueError("KL divergence is infinite: q vanishes where p is positive")
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


def tv(p, q) -> float:
    """Total variation distance, sup_A |P(A) - Q(A)| = half the L1 distance."""
    p, q = _aligned(p, q)
    return 0.5 * float(np.abs(p - q).sum())


def pinsker_holds(p, q, tol: float = 1e-12) -> bool:
    """TV <= sqrt(KL/2) with KL in nats."""
    return tv(p, q) <= np.sqrt(kl(p, q) * np.log(2.0) / 2.0) + tol


def _as_pmf(p) -> np.ndarray:
    if isinstance(p, DiscreteDist):
        return p.pmf
    arr = np.asarray(p, dtype=float).reshape(-1)
    if np.any(arr < 0) or abs(arr.sum() - 1.0) > JOINT_TOL:
        raise NormalizationError("not a probability vector")
    return arr


def _aligned(p, q) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, DiscreteDist) and isinstance(q, DiscreteDist):
        support = np.union1d(p.support, q.support)
        pp = np.zeros(support.size)
        qq = np.zeros(support.size)
        pp[np.searchsorted(support, p.support)] = p.pmf
        qq[np.searchsorted(support, q.support)] = q.pmf
        return pp, qq
    pp, qq = _as_pmf(p), _as_pmf(q)
    if pp.shape != qq.shape:
        raise ValueError("distributions must share a domain")
    return pp, qq


def state_entropies(alg: FiniteStateAlgorithm, stream: ProductStream) -> np.ndarray:
    """H(M_i) for i = 1..s."""
    return np.array([entropy(row) for row in propagate(alg, stream)[1:]])


def ic_space_bound(alg: FiniteStateAlgorithm, stream: ProductStream,
                   tol: float = 1e-9) -> tuple[float, float]:
    """(IC, sum_i H(M_i)); raises if IC exceeds the entropy sum by more than ``tol``."""
    ic = information_cost(alg, stream)
    h = float(state_entropies(alg, stream).sum())
    if ic > h + tol:
        raise AssertionError(f"information cost {ic} exceeds entropy sum {h}")
    return ic, h


# -- identities on random instances ---------------------------------------

def _joint_entropy(p: np.ndarray, keep: Sequence[int]) -> float:
    drop = tuple(ax for ax in range(p.ndim) if ax not in keep)
    return entropy(p.sum(axis=drop).reshape(-1))


def cmi_axes(p: np.ndarray, x: Sequence[int], y: Sequence[int], z: Sequence[int]) -> float:
    """I(X ; Y | Z) for groups of axes of a joint array, via entropies."""
    x, y, z = list(x), list(y), list(z)
    return (_joint_entropy(p, x + z) + _joint_entropy(p, y + z)
            - _joint_entropy(p, x + y + z) - _joint_entropy(p, z))


@dataclass
class IdentityReport:
    instances: int = 0
    chain_rule_max_error: float = 0.0
    superadditivity_min_slack: float = float("inf")
    data_processing_min_slack: float = float("inf")
    pinsker_checks: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _random_simplex(rng: np.random.Generator, shape) -> np.ndarray:
    w = rng.exponential(size=shape)
    # sparsify some entries so zero-probability cells are exercised
    w[rng.random(size=shape) < 0.15] = 0.0
    if w.sum() == 0:
        w.flat[0] = 1.0
    return w / w.sum()


def _random_conditional(rng, shape_cond, n_out) -> np.ndarray:
    w = rng.exponential(size=tuple(shape_cond) + (n_out,))
    w[rng.random(size=w.shape) < 0.15] = 0.0
    w[..., 0] += (w.sum(axis=-1) == 0)
    return w / w.sum(axis=-1, keepdims=True)


def random_algorithm(rng: np.random.Generator, n_states: int, supports: Sequence[Sequence[int]],
                     deterministic_fraction: float = 0.0) -> FiniteStateAlgorithm:
    init = _random_simplex(rng, (n_states,))
    kernels = []
    for support in supports:
        step = {}
        for x in support:
            if rng.random() < deterministic_fraction:
                K = np.zeros((n_states, n_states))
                K[np.arange(n_states), rng.integers(0, n_states, n_states)] = 1.0
            else:
                K = _random_conditional(rng, (n_states,), n_states)
            step[int(x)] = K
        kernels.append(step)
    return FiniteStateAlgorithm(init, kernels, "random")


def random_stream(rng: np.random.Generator, supports: Sequence[Sequence[int]]) -> ProductStream:
    steps = []
    for support in supports:
        w = rng.exponential(size=len(support)) + 0.05
        steps.append(DiscreteDist(np.array(support), w / w.sum()))
    return ProductStream(steps)


def info_identities_check(instances: int, rng: np.random.Generator,
                          tol: float = 1e-9) -> IdentityReport:
    """Chain rule, superadditivity, data processing and Pinsker on random instances."""
    report = IdentityReport()
    for n in range(instances):
        report.instances += 1
        dims = rng.integers(2, 4, size=4)

        # chain rule: I(X1,X2;Y|Z) = I(X1;Y|Z,X2) + I(X2;Y|Z), axes (x1, x2, y, z)
        p = _random_simplex(rng, tuple(dims))
        lhs = cmi_axes(p, [0, 1], [2], [3])
        rhs = cmi_axes(p, [0], [2], [3, 1]) + cmi_axes(p, [1], [2], [3])
        err = abs(lhs - rhs)
        report.chain_rule_max_error = max(report.chain_rule_max_error, err)
        if err > tol:
            report.violations.append(f"instance {n}: chain rule off by {err:.3e}")

        # superadditivity with X1, X2 conditionally independent given Z
        dz, d1, d2, dy = dims
        pz = _random_simplex(rng, (dz,))
        p1 = _random_conditional(rng, (dz,), d1)
        p2 = _random_conditional(rng, (dz,), d2)
        py = _random_conditional(rng, (dz, d1, d2), dy)
        q = np.einsum("z,za,zb,zaby->abyz", pz, p1, p2, py)
        slack = cmi_axes(q, [0, 1], [2], [3]) - cmi_axes(q, [0], [2], [3]) - cmi_axes(q, [1], [2], [3])
        report.superadditivity_min_slack = min(report.superadditivity_min_slack, slack)
        if slack < -tol:
            report.violations.append(f"instance {n}: superadditivity fails by {-slack:.3e}")

        # data processing along a random streaming chain
        s = int(rng.integers(2, 5))
        supports = [list(range(int(rng.integers(1, 4)))) for _ in range(s)]
        alg = random_algorithm(rng, int(rng.integers(1, 5)), supports)
        stream = random_stream(rng, supports)
        _, terms = information_cost(alg, stream, return_terms=True)
        for j in range(s):
            col = terms[j:, j]
            if col.size > 1:
                inc = float(np.min(col[:-1] - col[1:]))
                report.data_processing_min_slack = min(report.data_processing_min_slack, inc)
                if inc < -tol:
                    report.violations.append(f"instance {n}: data processing fails at j={j + 1}")

        # Pinsker on the pairs behind I(Y;X|Z) = E_{X,Z} KL(P_{Y|X,Z} || P_{Y|Z})
        pxyz = p.sum(axis=1)  # axes (x1, y, z)
        for z in range(pxyz.shape[2]):
            pz_slice = pxyz[:, :, z]
            if pz_slice.sum() == 0:
                continue
            py_z = pz_slice.sum(axis=0) / pz_slice.sum()
            for x in range(pxyz.shape[0]):
                if pz_slice[x].sum() == 0:
                    continue
                py_xz = pz_slice[x] / pz_slice[x].sum()
                report.pinsker_checks += 1
                if not pinsker_holds(py_xz, py_z):
                    report.violations.append(f"instance {n}: Pinsker fails")
    return report


# -- k-fold products --------------------------------------------------------

def kfold_product(alg: FiniteStateAlgorithm, stream: ProductStream,
                  k: int) -> tuple[FiniteStateAlgorithm, ProductStream]:
    """k independent copies of ``alg`` run on k independent copies of ``stream``.

    States are mixed-radix tuples with copy 1 most significant.  Each step's
    vector input (x_1..x_k) is labelled by its rank in the lexicographic
    order of the product of the per-copy supports.
    """
    _check_shapes(alg, stream)
    if k < 1:
        raise ValueError("k must be positive")
    init = alg.init
    for _ in range(k - 1):
        init = np.kron(init, alg.init)
    kernels = []
    steps = []
    for t, d in enumerate(stream.steps, start=1):
        step = {}
        pmf = []
        for code, combo in enumerate(itertools.product(range(len(d)), repeat=k)):
            K = np.ones((1, 1))
            prob = 1.0
            for idx in combo:
                K = np.kron(K, alg.kernels[t - 1][int(d.support[idx])])
                prob *= d.pmf[idx]
            step[code] = K
            pmf.append(prob)
        kernels.append(step)
        pmf = np.array(pmf)
        steps.append(DiscreteDist(np.arange(pmf.size), pmf / pmf.sum()))
    return FiniteStateAlgorithm(init, kernels, f"{alg.name}^{k}"), ProductStream(steps)

