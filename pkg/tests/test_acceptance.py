"""Acceptance criteria, one test each, at the stated tolerances."""

import time
from fractions import Fraction

import numpy as np

from amcount import algorithms, experiments, infocost, lbtools, streams
from amcount.counter import CounterConfig, Mode, exponent_pmf
from amcount.stats import trial_rng
from oracles import brute_force_ic, nearest_slot_before, slot_positions


def test_01_martingale(criterion):
    start = time.perf_counter()
    worst = 0.0
    for a in (1.0, 0.5, 0.01):
        for n in (10, 100, 1000):
            pmf = exponent_pmf(a, n)
            mean = float(pmf @ (1.0 + a) ** np.arange(n + 1))
            worst = max(worst, abs(mean - (a * n + 1)) / (a * n + 1))
    elapsed = time.perf_counter() - start
    criterion(1, worst <= 1e-9 and elapsed < 5.0,
              f"max rel error {worst:.2e} (<= 1e-9), {elapsed:.2f}s (< 5s)")


def test_02_epsilon_delta_contract(criterion):
    start = time.perf_counter()
    cfg = CounterConfig(0.1, 0.05, Mode.MEDIAN)
    s = experiments.failure_rate(cfg, 10 ** 5, 10 ** 4, seed=20240601)
    elapsed = time.perf_counter() - start
    criterion(2, s.ok and elapsed < 300,
              f"m={cfg.copies} a={cfg.base_param:.6f}: {s.failures}/{s.checks} failures, "
              f"rate {s.rate:.4f} <= delta + margin = {s.delta + s.margin:.4f}, {elapsed:.0f}s (< 300s)")


def test_03_space_growth(criterion):
    rows = experiments.space_sweep(1.0, 1, [10, 20, 30], trials=1000, seed=3)
    steps = [b.mean_bits - a.mean_bits for a, b in zip(rows, rows[1:])]
    criterion(3, all(s <= 2.5 for s in steps),
              "mean bits " + ", ".join(f"N=2^{e}: {r.mean_bits:.3f}" for e, r in zip((10, 20, 30), rows))
              + f"; steps {', '.join(f'{s:.3f}' for s in steps)} (<= 2.5)")


def test_04_hard_stream(criterion):
    p = streams.hard_params_from_T(2, 8)
    ok = (p.L, p.n) == (3, 24)
    allowed = streams.marginal_supports(p)
    live = {pos: scale for scale in range(1, p.L + 1) for pos in slot_positions(scale, p)}
    rng = trial_rng(4, 0)
    for _ in range(10 ** 4):
        x = streams.sample_hard_stream(p, rng)
        ok &= int(x.sum()) <= 24
        nz = np.nonzero(x)[0] + 1
        ok &= all(pos in live and x[pos - 1] == 2 ** live[pos] for pos in nz)
        ok &= all(int(v) in allowed[t] for t, v in enumerate(x))
    mismatches = 0
    for scale in range(1, p.L + 1):
        for i in range(1, p.n + 1):
            ref = nearest_slot_before(i, scale, p)
            try:
                got = streams.index_floor(i, scale, p)
            except ValueError:
                got = None
            mismatches += got != ref
        for j, pos in enumerate(slot_positions(scale, p), start=1):
            mismatches += streams.index_ceil(j, scale, p) != pos
    criterion(4, ok and mismatches == 0,
              f"B=2 T=8 -> L={p.L} n={p.n}; 10^4 samples within structure; {mismatches} index mismatches")


def test_05_ic_exactness(criterion):
    rng = trial_rng(5, 0)
    worst = 0.0
    bound_ok = True
    sizes = []
    for _ in range(50):
        s = int(rng.integers(1, 7))
        S = int(rng.integers(1, 9))
        supports = [sorted(rng.choice(6, size=int(rng.integers(1, 4)), replace=False).tolist())
                    for _ in range(s)]
        alg = infocost.random_algorithm(rng, S, supports, deterministic_fraction=float(rng.choice([0, 0.5, 1])))
        stream = infocost.random_stream(rng, supports)
        ic, h = infocost.ic_space_bound(alg, stream)
        ref, _ = brute_force_ic(alg, stream)
        worst = max(worst, abs(ic - ref))
        bound_ok &= ic <= h + 1e-9
        sizes.append((s, S))
    bits2 = algorithms.uniform_bits(2)
    exact_two = infocost.information_cost(algorithms.exact_sum(bits2), bits2)
    one_state = infocost.information_cost(algorithms.trivial(bits2), bits2)
    ok = worst <= 1e-9 and bound_ok and abs(exact_two - 2.5) <= 1e-12 and one_state == 0.0
    criterion(5, ok, f"50 instances (max s={max(a for a, _ in sizes)}, max S={max(b for _, b in sizes)}): "
                     f"max |IC - brute force| {worst:.1e}; single-state {one_state}; "
                     f"exact sum on 2 bits {exact_two:.12f}; IC <= sum H(M_i) on all")


def test_06_direct_sum(criterion):
    p = streams.hard_params_from_T(2, 2)
    stream = algorithms.hard_product_stream(p)
    rng = trial_rng(6, 0)
    supports = [list(map(int, d.support)) for d in stream.steps]
    # the product-stream law of each step matches sample_kfold's batches
    batches = np.stack([streams.sample_kfold(p, 2, rng) for _ in range(4000)])
    law_ok = all(set(map(int, np.unique(batches[:, t, :]))) <= set(supports[t]) for t in range(p.n))
    worst = 0.0
    algs = [infocost.random_algorithm(rng, 3, supports), algorithms.morris_discretized(stream, 0.5),
            algorithms.exact_sum(stream)]
    for alg in algs:
        single = infocost.information_cost(alg, stream)
        for k in (2, 3):
            big, big_stream = infocost.kfold_product(alg, stream, k)
            worst = max(worst, abs(infocost.information_cost(big, big_stream) - k * single))
    criterion(6, law_ok and worst <= 1e-9,
              f"{len(algs)} algorithms, k in {{2,3}}: max |IC_k - k IC| {worst:.1e} (<= 1e-9)")


def test_07_identities(criterion):
    rep = infocost.info_identities_check(1000, trial_rng(7, 0), tol=1e-9)
    criterion(7, rep.ok and rep.instances == 1000,
              f"1000 instances: chain rule max error {rep.chain_rule_max_error:.1e}, "
              f"superadditivity min slack {rep.superadditivity_min_slack:.1e}, "
              f"data processing min slack {rep.data_processing_min_slack:.1e}, "
              f"{rep.pinsker_checks} Pinsker pairs, {len(rep.violations)} violations")


def test_08_f_lemma(criterion):
    rep = lbtools.f_lemma_suite(1000, trial_rng(8, 0), max_support=8, tol=1e-12)
    criterion(8, not rep.violations and rep.min_f_at_zero >= 0.5,
              f"1000 pairs: min product slack {rep.min_product_slack:.2e}, min halving slack "
              f"{rep.min_halving_slack:.2e}, min f(.,0) {rep.min_f_at_zero:.4f}")


def test_09_gap_sequence(criterion):
    parts = []
    ok = True
    for eps in (0.01, 0.05, 0.1, 0.2):
        e = Fraction(str(eps))
        worst = None
        prev = lbtools.gap_sequence(eps, 1)
        for i in range(1, 1001):
            nxt = lbtools.gap_sequence(eps, i + 1)
            slack = (1 - e) * nxt - (1 + e) * prev
            worst = slack if worst is None else min(worst, slack)
            prev = nxt
        ok &= worst >= 2 - 4 * e - Fraction(1, 10 ** 9)
        parts.append(f"eps={eps}: min slack {float(worst):.4f} >= {2 - 4 * eps:.2f}")
    criterion(9, ok, "; ".join(parts))


def test_10_gv_code(criterion):
    start = time.perf_counter()
    code = lbtools.gv_greedy(8, 20, 18, seed=10)
    elapsed = time.perf_counter() - start
    target = 8 ** (0.05 * 20)
    criterion(10, code.verify() and len(code) >= target and elapsed < 60,
              f"q=8 k=20 d=18: size {len(code)} >= {target:.0f}, min distance {code.min_distance()}, "
              f"{elapsed:.1f}s (< 60s)")


def test_11_sparse_locations(criterion):
    row = experiments.sparse_locations(10 ** 6, 10 ** 3, 100, seed=11)
    criterion(11, row.within_bound >= 0.99,
              f"k=10^6 t=10^3: {row.within_bound * 100:.0f}/100 placements within {row.bound:.0f} bits "
              f"(mean {row.mean_location_bits:.0f}, max {row.max_location_bits})")


def test_12_ic_ordering(criterion):
    stream = algorithms.uniform_bits(64)
    trivial = infocost.information_cost(algorithms.trivial(stream), stream)
    block = infocost.information_cost(algorithms.block_sum(stream, 8), stream)
    exact = infocost.information_cost(algorithms.exact_sum(stream), stream)
    criterion(12, trivial == 0.0 < block < exact,
              f"Unif{{0,1}}^64: trivial {trivial}, block_sum(8) {block:.3f}, exact_sum {exact:.3f} bits")
