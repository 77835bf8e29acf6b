"""Command-line harness: ``amcount <subcommand> [options]``.

Every subcommand needs a seed (``--seed`` or the AMCOUNT_SEED variable)
and writes CSV whose first line is a schema tag and second line records
the full configuration.  Output goes to a temporary file that is moved
into place only when the command succeeds.

Exit status: 0 success, 1 a check failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import os
import sys
import tempfile
from pathlib import Path

from amcount import algorithms, experiments, infocost, lbtools, streams
from amcount.counter import CounterConfig, Mode
from amcount.dist import DiscreteDist, NormalizationError
from amcount.stats import trial_rng

SCHEMA = "amcount-csv v1"
COST_LIMIT = 10 ** 9


class ConfigError(Exception):
    pass


@contextlib.contextmanager
def _output(path: str | None):
    """Text sink that only materializes ``path`` on success."""
    if path is None or path == "-":
        yield sys.stdout
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, target)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _preamble(fh, command: str, args: argparse.Namespace) -> None:
    fh.write(f"# {SCHEMA} {command}\n")
    skip = {"func", "command"}
    cfg = " ".join(f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip)
    fh.write(f"# config {cfg}\n")


def _writer(fh) -> csv.writer:
    return csv.writer(fh, lineterminator="\n")


def _counter_config(args) -> CounterConfig:
    try:
        return CounterConfig(args.epsilon, args.delta, Mode(args.mode))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _counts(args) -> list[int]:
    if args.schedule:
        text = Path(args.schedule).read_text(encoding="utf-8")
        counts = [int(tok) for tok in text.split()]
        if not counts or min(counts) < 0:
            raise ConfigError("schedule must list one nonnegative count per counter")
        return counts
    if args.n is None or args.n < 0:
        raise ConfigError("give --n (nonnegative) or --schedule")
    return [args.n] * args.k


def cmd_bench_error(args) -> int:
    config = _counter_config(args)
    counts = _counts(args)
    ok = True
    with _output(args.out) as fh:
        _preamble(fh, "bench-error", args)
        w = _writer(fh)
        w.writerow(["trial", "counter", "true_count", "estimate", "rel_error", "failure", "space_bits"])
        for item in experiments.error_trials(config, counts, args.trials, args.seed,
                                             args.density_threshold):
            if isinstance(item, experiments.ErrorRow):
                w.writerow([item.trial, item.counter, item.true_count, repr(item.estimate),
                            f"{item.rel_error:.9g}", int(item.failure), item.space_bits])
            else:
                ok = item.ok
                fh.write(f"# summary checks={item.checks} failures={item.failures} "
                         f"rate={item.rate:.9g} wilson99_lo={item.wilson_lo:.9g} "
                         f"wilson99_hi={item.wilson_hi:.9g} delta={item.delta} "
                         f"mean_space_bits={item.mean_space_bits:.9g} pass={str(ok).lower()}\n")
    return 0 if ok else 1


def cmd_bench_space(args) -> int:
    with _output(args.out) as fh:
        _preamble(fh, "bench-space", args)
        w = _writer(fh)
        if args.k is None:
            if args.a is not None:
                a, m = args.a, 1
            else:
                cfg = _counter_config(args)
                a, m = cfg.base_param, cfg.copies
            rows = experiments.space_sweep(a, m, args.log2_n, args.trials, args.seed)
            w.writerow(["N", "k", "t", "mean_bits", "std_bits", "mean_stream_bits"])
            for r in rows:
                w.writerow([r.n, 1, 1, f"{r.mean_bits:.9g}", f"{r.std_bits:.9g}",
                            f"{r.mean_stream_bits:.9g}"])
            steps = [b.mean_bits - a_.mean_bits for a_, b in zip(rows, rows[1:])]
            fh.write(f"# fit loglog_slope={experiments.loglog_slope(rows):.6g} "
                     f"max_step_increase={max(steps, default=0.0):.6g}\n")
        else:
            w.writerow(["k", "t", "trials", "mean_location_bits", "max_location_bits",
                        "bound", "within_bound", "header_bits"])
            for t in args.t:
                if not 0 <= t <= args.k:
                    raise ConfigError(f"t={t} outside [0, k]")
                r = experiments.sparse_locations(args.k, t, args.trials, args.seed)
                w.writerow([r.k, r.t, r.trials, f"{r.mean_location_bits:.9g}", r.max_location_bits,
                            f"{r.bound:.9g}", f"{r.within_bound:.9g}", r.header_bits])
    return 0


def _hard_params(args) -> streams.HardStreamParams:
    try:
        if args.T is not None:
            return streams.hard_params_from_T(args.base, args.T)
        if args.delta is not None:
            return streams.hard_params(args.base, args.delta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError("give --T or --delta")


def cmd_gen_stream(args) -> int:
    params = _hard_params(args)
    rng = trial_rng(args.seed, 0)
    if args.k == 1:
        values = streams.sample_hard_stream(params, rng)
    else:
        values = streams.sample_kfold(params, args.k, rng)
    if args.out in (None, "-"):
        raise ConfigError("gen-stream needs --out")
    target = Path(args.out)
    tmp = target.with_name(f".{target.name}.partial")
    try:
        streams.write_stream(tmp, values, params, args.seed)
        os.replace(tmp, target)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise
    return 0


def _ic_inputs(args):
    if args.stream == "uniform":
        if args.T is None:
            raise ConfigError("--stream uniform needs --T (stream length)")
        stream = algorithms.uniform_bits(args.T)
        params = None
    else:
        params = _hard_params(args)
        stream = algorithms.hard_product_stream(params)
    if args.alg_file:
        alg = algorithms.read_algorithm(args.alg_file)
    else:
        kw = {}
        if args.alg == "block_sum":
            kw = {"block_size": args.block_size, "epsilon": args.block_epsilon}
        elif args.alg == "morris":
            kw = {"base_param": args.a, "cap": args.cap}
        alg = algorithms.reference_algorithm(args.alg, stream, **kw)
    return alg, stream, params


def cmd_infocost(args) -> int:
    try:
        alg, stream, params = _ic_inputs(args)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cost = infocost.projected_cost(alg, stream)
    if cost > COST_LIMIT and not args.force:
        raise ConfigError(f"projected cost {cost:.3g} exceeds {COST_LIMIT:.0e}; use --force")
    ic, terms = infocost.information_cost(alg, stream, return_terms=True)
    h = float(infocost.state_entropies(alg, stream).sum())
    with _output(args.out) as fh:
        _preamble(fh, "infocost", args)
        w = _writer(fh)
        w.writerow(["j", "i", "mi_bits"])
        s = len(stream)
        for i in range(1, s + 1):
            for j in range(1, i + 1):
                w.writerow([j, i, f"{terms[i - 1, j - 1]:.12g}"])
        line = (f"# summary alg={alg.name} states={alg.n_states} steps={s} "
                f"ic_bits={ic:.12g} sum_state_entropy_bits={h:.12g}")
        if params is not None:
            line += f" ic_per_nL={ic / (params.n * params.L):.12g}"
        fh.write(line + "\n")
    return 0 if ic <= h + 1e-9 else 1


def _parse_pmf(text: str) -> DiscreteDist:
    masses = {}
    for tok in text.split(","):
        v, _, p = tok.partition(":")
        masses[int(v)] = float(p)
    return DiscreteDist.from_mapping(masses)


def cmd_lb_checks(args) -> int:
    rng = trial_rng(args.seed, 0)
    out = io.StringIO()
    failed = False
    if args.pmf is not None:
        try:
            P = _parse_pmf(args.pmf)
        except NormalizationError as exc:
            raise ConfigError(f"normalization error: {exc}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        out.write(f"f_value,{args.spread},{lbtools.f_functional(P, args.spread):.15g}\n")
    f_rep = lbtools.f_lemma_suite(args.instances, rng, args.max_support)
    failed |= bool(f_rep.violations)
    out.write(f"f_lemma,instances={f_rep.instances},min_product_slack={f_rep.min_product_slack:.3e},"
              f"min_halving_slack={f_rep.min_halving_slack:.3e},"
              f"min_f_at_zero={f_rep.min_f_at_zero:.6g},violations={len(f_rep.violations)}\n")
    for eps in args.gap_eps:
        try:
            g = lbtools.verify_gaps(eps, q=args.gap_q)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        failed |= not g.meets_guarantee
        out.write(f"gaps,epsilon={eps},q={g.q},min_slack={g.min_slack:.9g},"
                  f"guaranteed={g.guaranteed:.9g},pass={str(g.meets_guarantee).lower()}\n")
    q, k, d = args.gv
    try:
        code = lbtools.gv_greedy(q, k, d, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    target = math.ceil(q ** (args.gv_rate * k) - 1e-9)
    good = code.verify() and len(code) >= target
    failed |= not good
    out.write(f"gv,q={q},k={k},d={d},size={len(code)},target={target},"
              f"min_distance={code.min_distance()},exhaustive={str(code.exhaustive).lower()},"
              f"pass={str(good).lower()}\n")
    if args.code_out:
        lbtools.write_code(args.code_out, code)
    id_rep = infocost.info_identities_check(args.identity_instances, rng)
    failed |= not id_rep.ok
    out.write(f"identities,instances={id_rep.instances},chain_max_err={id_rep.chain_rule_max_error:.3e},"
              f"superadd_min_slack={id_rep.superadditivity_min_slack:.3e},"
              f"pinsker_checks={id_rep.pinsker_checks},violations={len(id_rep.violations)}\n")
    with _output(args.out) as fh:
        _preamble(fh, "lb-checks", args)
        fh.write(out.getvalue())
        fh.write(f"# result {'fail' if failed else 'pass'}\n")
    return 1 if failed else 0


def _env_seed() -> int | None:
    raw = os.environ.get("AMCOUNT_SEED")
    return int(raw) if raw not in (None, "") else None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amcount", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=_env_seed(),
                        help="master seed (default: $AMCOUNT_SEED)")
        sp.add_argument("--out", default=None, help="output path ('-' or omitted: stdout)")

    def counter_opts(sp):
        sp.add_argument("--epsilon", type=float, default=0.1)
        sp.add_argument("--delta", type=float, default=0.05)
        sp.add_argument("--mode", choices=[m.value for m in Mode], default="median")

    sp = sub.add_parser("bench-error", help="Monte Carlo failure rate of (k-)counters")
    common(sp)
    counter_opts(sp)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--n", type=int, default=None, help="increments per counter")
    sp.add_argument("--schedule", default=None, help="file with one count per counter")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--density-threshold", type=float, default=0.25)
    sp.set_defaults(func=cmd_bench_error)

    sp = sub.add_parser("bench-space", help="serialized size against N, or sparse location cost")
    common(sp)
    counter_opts(sp)
    sp.add_argument("--a", type=float, default=None, help="explicit Morris base a (single copy)")
    sp.add_argument("--log2-n", type=int, nargs="+", default=[10, 20, 30])
    sp.add_argument("--k", type=int, default=None, help="sparse experiment: number of counters")
    sp.add_argument("--t", type=int, nargs="+", default=[1000], help="sparse experiment: non-zero counts")
    sp.add_argument("--trials", type=int, default=1000)
    sp.set_defaults(func=cmd_bench_space)

    sp = sub.add_parser("gen-stream", help="sample the multi-scale hard stream")
    common(sp)
    sp.add_argument("--base", type=int, default=2)
    sp.add_argument("--T", type=int, default=None)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--k", type=int, default=1)
    sp.set_defaults(func=cmd_gen_stream)

    sp = sub.add_parser("infocost", help="exact information cost of a reference algorithm")
    common(sp)
    sp.add_argument("--alg", choices=["trivial", "exact_sum", "block_sum", "morris"], default="exact_sum")
    sp.add_argument("--alg-file", default=None)
    sp.add_argument("--stream", choices=["uniform", "hard"], default="uniform")
    sp.add_argument("--T", type=int, default=None)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--base", type=int, default=2)
    sp.add_argument("--block-size", type=int, default=8)
    sp.add_argument("--block-epsilon", type=float, default=0.5)
    sp.add_argument("--a", type=float, default=1.0, help="Morris base for --alg morris")
    sp.add_argument("--cap", type=int, default=None)
    sp.add_argument("--force", action="store_true", help="ignore the cost guard")
    sp.set_defaults(func=cmd_infocost)

    sp = sub.add_parser("lb-checks", help="lower-bound machinery property suites")
    common(sp)
    sp.add_argument("--instances", type=int, default=1000)
    sp.add_argument("--identity-instances", type=int, default=1000)
    sp.add_argument("--max-support", type=int, default=8)
    sp.add_argument("--gap-eps", type=float, nargs="+", default=[0.01, 0.05, 0.1, 0.2])
    sp.add_argument("--gap-q", type=int, default=1001)
    sp.add_argument("--gv", type=int, nargs=3, metavar=("Q", "K", "D"), default=[8, 20, 18])
    sp.add_argument("--gv-rate", type=float, default=0.05)
    sp.add_argument("--code-out", default=None)
    sp.add_argument("--pmf", default=None, help="evaluate f on 'v:p,v:p,...'")
    sp.add_argument("--spread", type=float, default=1.0)
    sp.set_defaults(func=cmd_lb_checks)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        parser.error("a seed is required: pass --seed or set AMCOUNT_SEED")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"amcount: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
