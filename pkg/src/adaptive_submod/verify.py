"""Desk-scale invariant suites, runnable from the CLI and the test suite.

Each suite replays one of the package's statistical contracts on freshly
generated fixtures and reports measured-versus-threshold per check.  The
suites deliberately share code with nothing but the public API, so they
double as end-to-end exercises.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .baselines import brute_force_cover, brute_force_max, greedy
from .cover import adaptive_greedy_cover
from .estimator import BernoulliSource, reduced_mean, reduced_mean_sample_count
from .maximize import binary_search_interval, max_singleton
from .objectives import gen_coverage
from .oracle import OracleHandle, subsample_bernoulli
from .rng import RandomSource
from .threshold import ThresholdConfig, round_filter, threshold_sampling


@dataclass
class CheckResult:
    name: str
    measured: float
    threshold: float
    direction: str  # "<=" or ">="

    @property
    def passed(self) -> bool:
        if self.direction == "<=":
            return self.measured <= self.threshold
        return self.measured >= self.threshold

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"[{mark}] {self.name}: measured {self.measured:.6g} "
                f"{self.direction} threshold {self.threshold:.6g}")


def suite_submodularity(seed: int = 0, trials: int = 200, instances: int = 5) -> list[CheckResult]:
    """Monotonicity and diminishing returns on generated coverage fixtures."""
    rng = RandomSource(seed)
    violations = 0
    total = 0
    for idx in range(instances):
        inst = gen_coverage(rng.split(idx), n=20, universe=40, avg_set_size=5,
                            weighted=bool(idx % 2))
        gen = rng.split(idx, 1).generator
        for _ in range(trials):
            small = np.flatnonzero(gen.random(inst.n) < 0.3)
            grow = np.flatnonzero(gen.random(inst.n) < 0.3)
            big = np.union1d(small, grow)
            outside = np.setdiff1d(np.arange(inst.n), big)
            total += 1
            f_small, f_big = inst.value(small), inst.value(big)
            if f_small > f_big + 1e-9:
                violations += 1
                continue
            if outside.size:
                x = int(outside[gen.integers(outside.size)])
                d_small = inst.value(np.append(small, x)) - f_small
                d_big = inst.value(np.append(big, x)) - f_big
                if d_big > d_small + 1e-9 or d_big < -1e-9:
                    violations += 1
    return [CheckResult("submodularity violations", violations, 0, "<=")]


def suite_estimator(seed: int = 0, eps: float = 0.2, delta: float = 0.1,
                    trials: int = 1000) -> list[CheckResult]:
    """Wrong-side verdict rates of the mean test on synthetic sources."""
    rng = RandomSource(seed)
    m = reduced_mean_sample_count(eps, delta)
    high_wrong = sum(
        reduced_mean(BernoulliSource(1 - eps / 2, rng.split(0, t)), eps, delta).reduced
        for t in range(trials))
    low_wrong = sum(
        not reduced_mean(BernoulliSource(1 - 3 * eps, rng.split(1, t)), eps, delta).reduced
        for t in range(trials))
    return [
        CheckResult("false 'reduced' rate at mean 1-eps/2",
                    high_wrong / trials, delta + 0.03, "<="),
        CheckResult("false 'not reduced' rate at mean 1-3eps",
                    low_wrong / trials, delta + 0.03, "<="),
        CheckResult("sample count per test", m,
                    16 * math.ceil(math.log(2 / delta) / eps**2), "<="),
    ]


def suite_threshold_postconditions(seed: int = 0, trials: int = 400, n: int = 30,
                                   k: int = 5, eps: float = 0.3,
                                   delta: float = 0.05) -> list[CheckResult]:
    """Short runs leave no above-threshold element, up to the failure rate."""
    rng = RandomSource(seed)
    inst = gen_coverage(rng.split(0), n=n, universe=2 * n, avg_set_size=4)
    _, opt = brute_force_max(OracleHandle(inst), k)
    tau = opt / k
    short = 0
    bad = 0
    ratios = []
    for t in range(trials):
        oracle = OracleHandle(inst)
        out = threshold_sampling(oracle, ThresholdConfig(k=k, tau=tau, eps=eps,
                                                         delta=delta),
                                 rng.split(1, t))
        if out.size and out.size < k:
            ratios.append(out.value / out.size)
        if out.size < k:
            short += 1
            leftovers = round_filter(oracle, out.solution,
                                     np.setdiff1d(np.arange(n), out.solution),
                                     tau, solution_value=out.value)
            if leftovers.size:
                bad += 1
    checks = [CheckResult("short runs with a leftover above-threshold element",
                          bad / max(short, 1), delta + 0.05, "<=")]
    if ratios:
        checks.append(CheckResult(
            "mean average contribution over short runs",
            float(np.mean(ratios)),
            (1 - eps) * tau - 3 * float(np.std(ratios)) / math.sqrt(len(ratios)),
            ">="))
    return checks


def refined_max_estimate(oracle: OracleHandle, k: int,
                         extra: int = 4) -> tuple[float, float]:
    """(lower, upper) bounds on OPT via greedy plus brute refinement.

    The lower bound re-optimizes exactly over a reduced pool (the greedy
    picks plus the next-best singletons); the upper bound is the standard
    e/(e-1) greedy certificate.
    """
    picks = greedy(oracle.fork(), k)
    g_value = oracle.evaluate(picks)
    n = oracle.n
    ids = np.arange(n, dtype=np.int64)
    singles = oracle.fork().eval_csr(ids, np.arange(n + 1, dtype=np.int64))
    order = np.argsort(-singles, kind="stable")
    pool = picks
    for x in order:
        if pool.size >= min(n, k + extra):
            break
        pool = np.union1d(pool, [int(x)])
    best = g_value
    if math.comb(pool.size, min(k, pool.size)) <= 200_000:
        sub = oracle.fork().restricted(pool)
        _, refined_val = brute_force_max(sub, min(k, pool.size))
        best = max(best, refined_val)
    return best, g_value * math.e / (math.e - 1.0)


def suite_subsample_lemma(seed: int = 0, n: int = 100, k: int = 20,
                          ell: float = 4.0, delta: float = 0.2,
                          trials: int = 500) -> list[CheckResult]:
    """Monte-Carlo of the thinning sandwich on OPT.

    OPT is bracketed by greedy plus brute refinement over a reduced pool;
    the thinned OPT' by the greedy certificate alone.  A trial counts as a
    hold when the sandwich is satisfied with the bounds placed on their
    unfavorable sides wherever that cannot produce spurious failures.
    """
    rng = RandomSource(seed)
    inst = gen_coverage(rng.split(0), n=n, universe=3 * n, avg_set_size=6)
    _, dstar = max_singleton(OracleHandle(inst))
    opt_lb, opt_ub = refined_max_estimate(OracleHandle(inst), k)
    holds = 0
    for t in range(trials):
        keep = subsample_bernoulli(rng.split(1, t), np.arange(n), 1.0 / ell)
        if keep.size:
            sub = OracleHandle(inst).restricted(keep)
            sub_k = min(k, keep.size)
            opt_sub_lb = sub.evaluate(greedy(sub.fork(), sub_k))
            opt_sub_ub = opt_sub_lb * math.e / (math.e - 1.0)
        else:
            opt_sub_lb = opt_sub_ub = 0.0
        lower_ok = (dstar + opt_sub_ub) / 2.0 <= opt_ub
        upper_ok = opt_lb <= (2.0 * ell / delta) * (dstar + opt_sub_lb)
        holds += lower_ok and upper_ok
    return [CheckResult("two-sided sandwich hold rate", holds / trials,
                        0.75, ">=")]


def suite_intervals(seed: int = 0, trials: int = 50) -> list[CheckResult]:
    """Bisection bracket soundness and contraction on brute-force fixtures."""
    rng = RandomSource(seed)
    n, k = 14, 8
    contained = 0
    contraction_ok = 0
    for t in range(trials):
        inst = gen_coverage(rng.split(0, t), n=n, universe=30, avg_set_size=5)
        _, opt = brute_force_max(OracleHandle(inst), k)
        interval, _ = binary_search_interval(OracleHandle(inst), k, 0.1,
                                             rng.split(1, t))
        if interval.lower * (1 - 1e-9) <= opt <= interval.upper * (1 + 1e-9):
            contained += 1
        p = 1.0 / math.log(k)
        steps = int(math.log(math.log(k)) / math.log(2.0))
        bound = 0.5 ** steps * math.log(k) + math.log(2.0 / p) + 1e-6
        if math.log(interval.ratio()) <= bound:
            contraction_ok += 1
    return [
        CheckResult("bracket contains brute-force OPT", contained / trials,
                    1 - 0.1 - 0.05, ">="),
        CheckResult("post-search log-ratio within contraction bound",
                    contraction_ok / trials, 1.0, ">="),
    ]


def suite_cover(seed: int = 0, trials: int = 100, n: int = 14) -> list[CheckResult]:
    """Cover feasibility (always) and size quality against brute force."""
    rng = RandomSource(seed)
    inst = gen_coverage(rng.split(0), n=n, universe=25, avg_set_size=5)
    oracle = OracleHandle(inst)
    target = int(oracle.evaluate(np.arange(n)))
    opt_set, _ = brute_force_cover(OracleHandle(inst), target)
    feasible = 0
    sizes = []
    for t in range(trials):
        sol = adaptive_greedy_cover(OracleHandle(inst), target, rng.split(1, t))
        val = OracleHandle(inst).evaluate(sol)
        feasible += val >= target
        sizes.append(sol.size)
    quality = float(np.mean(sizes)) / (max(1.0, math.log(target)) * max(opt_set.size, 1))
    return [
        CheckResult("feasibility rate", feasible / trials, 1.0, ">="),
        CheckResult("mean size / (ln(target) * optimal size)", quality, 8.0, "<="),
    ]


SUITES = {
    "submodularity": suite_submodularity,
    "estimator": suite_estimator,
    "threshold-postconditions": suite_threshold_postconditions,
    "subsample-lemma": suite_subsample_lemma,
    "intervals": suite_intervals,
    "cover": suite_cover,
}
