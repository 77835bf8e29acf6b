import itertools
from importlib import resources

import numpy as np
import pytest

from amcount import algorithms, infocost
from amcount.counter import exponent_pmf
from amcount.dist import DiscreteDist
from amcount.infocost import ProductStream, information_cost, propagate
from amcount.streams import hard_params_from_T


def run_deterministic(alg, xs):
    state = int(np.argmax(alg.init))
    for t, x in enumerate(xs):
        row = alg.kernels[t][x][state]
        assert row.max() == 1.0
        state = int(np.argmax(row))
    return state


def block_strategy_estimate(xs, S, eps):
    """Plain re-statement of the block strategy on a bit string."""
    half = S / 2
    exact = False
    estimate = 0
    current = 0
    for t, x in enumerate(xs, start=1):
        if exact:
            estimate += x
            continue
        current += x
        if t % S == 0:
            if (1 - eps) * half <= current <= (1 + eps) * half:
                estimate += half
            else:
                exact = True
                estimate += current
            current = 0
    return int(estimate if exact else estimate + current), exact


@pytest.mark.parametrize("S,s", [(2, 6), (4, 8), (4, 10)])
def test_block_sum_follows_strategy(S, s):
    stream = algorithms.uniform_bits(s)
    alg = algorithms.block_sum(stream, S)
    n_normal = _normal_states(stream, S)
    for xs in itertools.product([0, 1], repeat=s):
        state = run_deterministic(alg, xs)
        want, exact = block_strategy_estimate(xs, S, 0.5)
        assert algorithms.block_sum_estimate(state, s, S, n_normal) == want
        assert (state >= n_normal) == exact


def _normal_states(stream, S):
    maxes = [int(d.support.max()) for d in stream.steps]
    return max(sum(maxes[b:b + S]) for b in range(0, len(maxes), S)) + 1


def test_block_sum_rejects_odd():
    with pytest.raises(ValueError):
        algorithms.block_sum(algorithms.uniform_bits(4), 3)


def test_exact_sum_state_is_sum():
    stream = algorithms.uniform_bits(5)
    alg = algorithms.exact_sum(stream)
    for xs in itertools.product([0, 1], repeat=5):
        assert run_deterministic(alg, xs) == sum(xs)


@pytest.mark.parametrize("a", [1.0, 0.5])
def test_morris_matches_exponent_law(a):
    stream = ProductStream([DiscreteDist.point(1)] * 30)
    alg = algorithms.morris_discretized(stream, a)
    final = propagate(alg, stream)[-1]
    pmf = exponent_pmf(a, 30)
    assert np.allclose(final, pmf[:final.size], atol=1e-12)
    assert pmf[final.size:].sum() < 1e-12


def test_morris_cap():
    cap = algorithms.morris_cap(1.0, 64)
    pmf = exponent_pmf(1.0, 64)
    assert pmf[cap + 1:].sum() < 1e-12 <= pmf[cap:].sum()


def test_morris_on_hard_stream():
    p = hard_params_from_T(2, 4)
    stream = algorithms.hard_product_stream(p)
    alg = algorithms.morris_discretized(stream, 0.5)
    ic, h = infocost.ic_space_bound(alg, stream)
    assert 0 < ic <= h


def test_file_roundtrip(tmp_path):
    stream = algorithms.uniform_bits(4)
    for alg in (algorithms.block_sum(stream, 2), algorithms.morris_discretized(stream, 0.7)):
        path = tmp_path / "a.alg"
        algorithms.write_algorithm(path, alg)
        back = algorithms.read_algorithm(path)
        assert back.name == alg.name
        assert information_cost(back, stream) == information_cost(alg, stream)


def test_bundled_files():
    data = resources.files("amcount") / "data"
    es = algorithms.read_algorithm(data / "exact_sum_2bits.alg")
    assert information_cost(es, algorithms.uniform_bits(2)) == pytest.approx(2.5)
    bs = algorithms.read_algorithm(data / "block_sum4_8bits.alg")
    stream = algorithms.uniform_bits(8)
    assert information_cost(bs, stream) == pytest.approx(
        information_cost(algorithms.block_sum(stream, 4), stream), abs=1e-12)


@pytest.mark.parametrize("text", [
    "nope\n",
    "amcount-alg v1\nstates 1\ninit 1.0\nstep 2 input 0\n1.0\n",
    "amcount-alg v1\nstates 2\ninit 1.0 0.0\nstep 1 input 0\n1.0 0.0\n",
    "amcount-alg v1\nstates 1\ninit 0.5\nstep 1 input 0\n1.0\n",
])
def test_bad_files(tmp_path, text):
    path = tmp_path / "bad.alg"
    path.write_text(text)
    with pytest.raises(ValueError):
        algorithms.read_algorithm(path)


def test_unknown_reference():
    with pytest.raises(ValueError):
        algorithms.reference_algorithm("magic", algorithms.uniform_bits(2))
