"""Benchmark harness command line.

Subcommands:
  gen     write a random instance file and print its digest
  run     run one algorithm on an instance, print a one-line report
  sweep   run a parameter grid, print CSV rows
  verify  run a named invariant suite, nonzero exit on failure

All randomness flows from --seed; when absent, a seed is drawn and printed
so the run can be replayed.  Exit codes: 0 success, 1 check or guard
failure, 2 usage error.  The ADAPTIVE_SUBMOD_THREADS environment variable
reserves a thread count for batch evaluation; results never depend on it.
"""
from __future__ import annotations

import argparse
import hashlib
import itertools
import os
import sys
import time

import numpy as np

from .baselines import (EnumerationLimitError, brute_force_cover,
                        brute_force_max, greedy, lazy_greedy)
from .cover import InfeasibleTargetError, adaptive_greedy_cover
from .maximize import (binary_search_maximization, exhaustive_maximization,
                       subsample_maximization)
from .objectives import (gen_additive, gen_coverage, gen_facility,
                         load_instance, save_instance)
from .oracle import OracleHandle
from .report import CSV_HEADER, RunReport
from .rng import RandomSource
from .verify import SUITES

ALGORITHMS = ("exhaustive", "binary-search", "subsample", "greedy",
              "lazy-greedy", "brute-force", "cover", "brute-cover")


def _threads() -> int:
    raw = os.environ.get("ADAPTIVE_SUBMOD_THREADS", "")
    if not raw:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise SystemExit(f"ADAPTIVE_SUBMOD_THREADS={raw!r} is not an integer")
    if value < 1:
        raise SystemExit("ADAPTIVE_SUBMOD_THREADS must be at least 1")
    return value


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy % (1 << 63))
    print(f"seed drawn: {seed} (pass --seed {seed} to replay)", file=sys.stderr)
    return seed


def _run_algorithm(alg: str, oracle: OracleHandle, args, seed: int):
    rng = RandomSource(seed)
    if alg in ("exhaustive", "binary-search", "subsample", "greedy",
               "lazy-greedy", "brute-force"):
        if args.k is None:
            raise SystemExit2("--k is required for maximization algorithms")
    if alg == "exhaustive":
        sol = exhaustive_maximization(oracle, args.k, args.eps, args.delta, rng)
    elif alg == "binary-search":
        sol = binary_search_maximization(oracle, args.k, args.eps, args.delta, rng)
    elif alg == "subsample":
        sol = subsample_maximization(oracle, args.k, args.eps, rng)
    elif alg == "greedy":
        sol = greedy(oracle, args.k)
    elif alg == "lazy-greedy":
        sol = lazy_greedy(oracle, args.k)
    elif alg == "brute-force":
        sol, _ = brute_force_max(oracle, args.k)
    elif alg == "cover":
        if args.target is None:
            raise SystemExit2("--target is required for cover")
        sol = adaptive_greedy_cover(oracle, args.target, rng)
    elif alg == "brute-cover":
        if args.target is None:
            raise SystemExit2("--target is required for brute-cover")
        sol, _ = brute_force_cover(oracle, args.target)
    else:
        raise SystemExit2(f"unknown algorithm {alg!r}")
    return sol


class SystemExit2(Exception):
    """Usage error surfaced with exit code 2."""


def _report_for(alg, instance_label, inst, args, seed) -> RunReport:
    oracle = OracleHandle(inst)
    start = time.perf_counter()
    sol = _run_algorithm(alg, oracle, args, seed)
    wall_ms = (time.perf_counter() - start) * 1e3
    value = inst.value(sol)
    opt = None
    if getattr(args, "ref", None) == "brute-force":
        if alg in ("cover", "brute-cover"):
            ref_set, _ = brute_force_cover(OracleHandle(inst), args.target)
            opt = float(ref_set.size)
            value = float(sol.size)  # cover quality is measured in set size
        else:
            _, opt = brute_force_max(OracleHandle(inst), args.k)
    uses_eps = alg in ("exhaustive", "binary-search", "subsample")
    return RunReport(
        algorithm=alg,
        instance=instance_label,
        n=inst.n,
        k=args.target if alg in ("cover", "brute-cover") else args.k,
        eps=args.eps if uses_eps else None,
        delta=args.delta if alg in ("exhaustive", "binary-search") else None,
        seed=seed,
        value=value,
        solution_size=int(sol.size),
        queries=oracle.ledger.total_queries,
        rounds=oracle.ledger.adaptive_rounds,
        wall_ms=wall_ms,
        opt_reference=opt,
    )


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def cmd_gen(args) -> int:
    rng = RandomSource(_resolve_seed(args))
    if args.kind == "coverage":
        inst = gen_coverage(rng, args.n, args.universe, args.set_size,
                            weighted=args.weighted)
    elif args.kind == "facility":
        inst = gen_facility(rng, args.n, args.clients)
    else:
        inst = gen_additive(rng, args.n)
    save_instance(inst, args.output)
    with open(args.output, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    print(f"{args.output} sha256={digest}")
    return 0


def cmd_run(args) -> int:
    inst = load_instance(args.inst)
    seed = _resolve_seed(args)
    report = _report_for(args.alg, args.inst, inst, args, seed)
    if args.format == "human":
        print(report.human_summary())
    else:
        print(report.to_json(include_timing=args.timing))
    return 0


def cmd_sweep(args) -> int:
    """Grid iteration order: algorithm, then n, then k, then eps, then seed."""
    seeds = args.seeds if args.seeds else [0]
    eps_grid = args.eps_grid if args.eps_grid else [args.eps]
    k_grid = args.k_grid if args.k_grid else ([args.k] if args.k else [])
    print(CSV_HEADER)
    if not k_grid:
        return 0
    if args.n_grid:
        # n sweeps regenerate the instance per size with the generator flags.
        instances = []
        for n in args.n_grid:
            inst = gen_coverage(RandomSource(args.gen_seed, (n,)), n,
                                args.universe, args.set_size)
            instances.append((f"gen:coverage:n={n}", inst))
    else:
        if args.inst is None:
            raise SystemExit2("sweep needs --inst or --n-grid")
        instances = [(args.inst, load_instance(args.inst))]
    for alg in args.algs:
        for label, inst in instances:
            for k, eps, seed in itertools.product(k_grid, eps_grid, seeds):
                ns = argparse.Namespace(k=k, eps=eps, delta=args.delta,
                                        target=args.target, ref=args.ref)
                report = _report_for(alg, label, inst, ns, seed)
                print(report.to_csv_row())
    return 0


def cmd_verify(args) -> int:
    suite = SUITES[args.suite]
    kwargs = {}
    if args.trials is not None:
        kwargs["trials"] = args.trials
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.suite == "estimator":
        if args.eps is not None:
            kwargs["eps"] = args.eps
        if args.delta is not None:
            kwargs["delta"] = args.delta
    if args.suite == "subsample-lemma":
        if args.n is not None:
            kwargs["n"] = args.n
        if args.ell is not None:
            kwargs["ell"] = args.ell
        if args.delta is not None:
            kwargs["delta"] = args.delta
    results = suite(**kwargs)
    ok = True
    for res in results:
        print(res.line())
        ok = ok and res.passed
    print("verify:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptive-submod",
        description="Low-adaptivity submodular maximization benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance file")
    g.add_argument("--kind", choices=("coverage", "facility", "additive"),
                   default="coverage")
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--universe", type=_positive_int, default=100)
    g.add_argument("--set-size", type=int, default=8, dest="set_size")
    g.add_argument("--clients", type=_positive_int, default=50)
    g.add_argument("--weighted", action="store_true")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("run", help="run one algorithm on an instance")
    r.add_argument("--alg", choices=ALGORITHMS, required=True)
    r.add_argument("--inst", required=True)
    r.add_argument("--k", type=int, default=None)
    r.add_argument("--target", type=int, default=None,
                   help="value target for the cover algorithms")
    r.add_argument("--eps", type=float, default=0.25)
    r.add_argument("--delta", type=float, default=0.1)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--ref", choices=("brute-force",), default=None,
                   help="also compute the exact reference optimum")
    r.add_argument("--format", choices=("json", "human"), default="json")
    r.add_argument("--timing", action="store_true",
                   help="include wall_ms in the JSON record (breaks "
                        "byte-for-byte replay identity)")
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("sweep", help="run a parameter grid, emit CSV")
    s.add_argument("--inst", default=None)
    s.add_argument("--algs", nargs="+", choices=ALGORITHMS, default=["greedy"])
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--k-grid", nargs="*", type=int, default=None)
    s.add_argument("--eps", type=float, default=0.25)
    s.add_argument("--eps-grid", nargs="*", type=float, default=None)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--target", type=int, default=None)
    s.add_argument("--seeds", nargs="*", type=int, default=None)
    s.add_argument("--ref", choices=("brute-force",), default=None)
    s.add_argument("--n-grid", nargs="*", type=int, default=None,
                   help="sweep ground-set sizes by regenerating coverage "
                        "instances (ignores --inst)")
    s.add_argument("--universe", type=_positive_int, default=100)
    s.add_argument("--set-size", type=int, default=8, dest="set_size")
    s.add_argument("--gen-seed", type=int, default=0)
    s.set_defaults(fn=cmd_sweep)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--eps", type=float, default=None)
    v.add_argument("--delta", type=float, default=None)
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--ell", type=float, default=None)
    v.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    _threads()  # validate the env var early; evaluation is deterministic anyway
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit2 as exc:
        parser.error(str(exc))  # exits with code 2
    except (EnumerationLimitError, InfeasibleTargetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
