"""Cardinality-constrained maximization drivers built on threshold sampling.

Three drivers trade preprocessing effort against total query cost.  All of
them guarantee E[f(S)] >= (1 - 1/e - eps) * OPT with the stated failure
probability, by sweeping thresholds near OPT/k:

  * exhaustive_maximization tries every threshold on a geometric grid over
    a bracket of OPT/k (by default [max-singleton / k, max-singleton]),
    running the descending-threshold ladder independently per grid point.
    Grid branches are independent, so their rounds overlap: the phase is
    accounted as sum-of-queries and max-of-rounds over branch ledgers.
  * binary_search_maximization first shrinks the bracket with a few rounds
    of an imprecise bisection (each step decides "OPT <= 2k*tau" versus
    "OPT >= p*k*tau" from one threshold-sampling run), then finishes with
    the exhaustive driver on the reduced bracket.
  * subsample_maximization first shrinks the bracket to a constant ratio by
    repeatedly Bernoulli-thinning the ground set and running a ladder of
    bisection decisions on the thinned instance, then finishes with the
    exhaustive driver.  On the thinned instance, OPT is pinned down by the
    sandwich (D + OPT')/2 <= OPT <= (2*ell/delta) * (D + OPT'), where D is
    the maximum singleton value and OPT' the thinned optimum.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .oracle import OracleHandle, Selection, subsample_bernoulli, union
from .rng import RandomSource
from .threshold import ThresholdConfig, threshold_sampling


@dataclass(frozen=True)
class Interval:
    """A bracket 0 < lower <= upper, contractually containing OPT."""

    lower: float
    upper: float

    def __post_init__(self):
        if not 0 < self.lower <= self.upper:
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")

    def ratio(self) -> float:
        return self.upper / self.lower


class DecisionOutcome(enum.Enum):
    """Result of one imprecise bisection step."""

    UPPER = "upper"   # certifies OPT <= 2*k*tau
    LOWER = "lower"   # certifies OPT >= p*k*tau


def max_singleton(oracle: OracleHandle) -> tuple[int, float]:
    """Best single element and its value; one batch of n queries.

    Ties break to the lowest id.  The value D satisfies D <= OPT <= k*D
    for any budget k, which seeds every bracket in this module.
    """
    n = oracle.n
    if n == 0:
        raise ValueError("ground set is empty")
    ids = np.arange(n, dtype=np.int64)
    with oracle.round():
        values = oracle.eval_csr(ids, np.arange(n + 1, dtype=np.int64))
    best = int(np.argmax(values))
    return best, float(values[best])


def _ladder(oracle: OracleHandle, k: int, tau: float, eps: float,
            delta_hat: float, m: int, rng: RandomSource) -> tuple[Selection, float]:
    """Descending-threshold ladder for one starting threshold."""
    solution = np.empty(0, dtype=np.int64)
    value = 0.0
    for j in range(m + 1):
        if solution.size >= k:
            break
        conditioned = oracle.shifted(solution)
        cfg = ThresholdConfig(k=k - solution.size, tau=(1.0 - eps) ** j * tau,
                              eps=eps, delta=delta_hat)
        outcome = threshold_sampling(conditioned, cfg, rng.split(j))
        solution = union(solution, outcome.solution)
        value = conditioned.base_value + outcome.value
    return solution, value


def exhaustive_maximization(oracle: OracleHandle, k: int, eps: float,
                            delta: float, rng: RandomSource,
                            interval: Interval | None = None) -> Selection:
    """Threshold grid search; E[f(S)] >= (1 - 1/e - eps) * OPT w.p. 1-delta.

    Without an interval the grid is (1+eps)^i * D/k for i = 0..r with
    r = ceil(2 ln(k)/eps), where D is the max singleton value.  With a
    per-element interval [L, U] the grid is (1+eps)^i * L, stopping once
    the values pass U.  Branches run on forked ledgers and are folded back
    as parallel work (queries add, rounds take the max), after which one
    comparison batch picks the best branch.
    """
    n = oracle.n
    if not 1 <= k <= n:
        raise ValueError(f"budget k={k} outside [1, n={n}]")
    if not 0 < eps <= 1:
        raise ValueError(f"eps={eps} outside (0, 1]")
    if not 0 < delta < 1:
        raise ValueError(f"delta={delta} outside (0, 1)")
    m = math.ceil(math.log(4.0) / eps)
    if interval is None:
        _, dstar = max_singleton(oracle)
        r = math.ceil(2.0 * math.log(max(k, 1)) / eps)
        taus = [(1.0 + eps) ** i * dstar / k for i in range(r + 1)]
    else:
        r = math.ceil(math.log(interval.ratio()) / math.log1p(eps)) + 1
        taus = [interval.lower * (1.0 + eps) ** i for i in range(r)]
    delta_hat = delta / (max(r, 1) * (m + 1))
    branches = []
    ledgers = []
    for b, tau in enumerate(taus):
        branch_oracle = oracle.fork()
        solution, value = _ladder(branch_oracle, k, tau, eps, delta_hat, m,
                                  rng.split(b))
        branches.append(solution)
        ledgers.append(branch_oracle.ledger)
    oracle.ledger.absorb_parallel(ledgers)
    values = oracle.evaluate_batch(branches)
    return branches[int(np.argmax(values))]


def imprecise_decision(oracle: OracleHandle, k: int, tau: float, p: float,
                       delta: float, rng: RandomSource) -> DecisionOutcome:
    """One bisection step: returns which side of tau OPT provably lies on.

    Runs threshold sampling with error 1 - p; with probability >= 1 - delta
    the reported inequality (UPPER: OPT <= 2*k*tau, LOWER: OPT >= p*k*tau)
    is true.  The two certificates may overlap.
    """
    if not 0 < p < 1:
        raise ValueError(f"balance parameter p={p} outside (0, 1)")
    cfg = ThresholdConfig(k=k, tau=tau, eps=1.0 - p, delta=delta)
    outcome = threshold_sampling(oracle, cfg, rng)
    if outcome.size < k and outcome.value <= k * tau:
        return DecisionOutcome.UPPER
    return DecisionOutcome.LOWER


def binary_search_interval(oracle: OracleHandle, k: int, delta: float,
                           rng: RandomSource) -> tuple[Interval, float]:
    """Shrink [D, kD] by floor(ln ln k / ln 2) imprecise bisection steps.

    Returns the final bracket and the per-step failure probability used,
    which the caller reuses for the finishing grid search.  After the
    search the ratio is at most 2e * ln(k).  Requires k >= 8 so that the
    balance parameter p = 1/ln(k) is meaningfully below 1/2.
    """
    if k < 8:
        raise ValueError("bisection needs k >= 8; use the exhaustive driver")
    _, dstar = max_singleton(oracle)
    lower, upper = dstar, k * dstar
    p = 1.0 / math.log(k)
    steps = int(math.log(math.log(k)) / math.log(2.0))
    delta_hat = delta / (steps + 1)
    for i in range(steps):
        tau = math.sqrt(lower * upper / (2.0 * p)) / k
        outcome = threshold_sampling(
            oracle, ThresholdConfig(k=k, tau=tau, eps=1.0 - p, delta=delta_hat),
            rng.split(i))
        if outcome.size < k and outcome.value <= k * tau:
            upper = 2.0 * k * tau
        else:
            lower = p * k * tau
    return Interval(lower, upper), delta_hat


def binary_search_maximization(oracle: OracleHandle, k: int, eps: float,
                               delta: float, rng: RandomSource) -> Selection:
    """Bisection preprocessing plus grid search; same guarantee, fewer queries.

    For k < 8 the bisection parameters degenerate, so the call falls through
    to the exhaustive driver unchanged.
    """
    if k < 8:
        return exhaustive_maximization(oracle, k, eps, delta, rng)
    interval, delta_hat = binary_search_interval(oracle, k, delta, rng)
    per_element = Interval(interval.lower / k, interval.upper / k)
    return exhaustive_maximization(oracle, k, eps, delta_hat, rng.split(1 << 20),
                                   interval=per_element)


@dataclass(frozen=True)
class PreprocessSchedule:
    """Per-iteration parameters of the subsample preprocessing loop.

    For the current bracket ratio R: thinning keeps elements w.p. 1/ell
    with ell = ln(R)^2; decisions run at balance p = 1/ln(R) over m+1 =
    ceil(log2 R)+1 doubling thresholds; delta_decision is the failure
    probability handed to each decision and delta_update the per-iteration
    budget that enters the bracket-update factors (their product over the
    union bound equals the iteration budget delta / (2 ln R)).
    """

    ratio: float
    ell: float
    p: float
    m: int
    delta_decision: float
    delta_update: float
    r_star: float

    @classmethod
    def for_ratio(cls, ratio: float, delta: float) -> "PreprocessSchedule":
        if ratio <= 1.0:
            raise ValueError("schedule needs a bracket ratio above 1")
        log_r = math.log(ratio)
        m = math.ceil(math.log2(ratio))
        delta_update = delta / (2.0 * log_r)
        return cls(ratio=ratio, ell=log_r ** 2, p=1.0 / log_r, m=m,
                   delta_decision=delta_update / (m + 1),
                   delta_update=delta_update,
                   r_star=2e6 / delta**2)


def _preprocess_update(kinds: list[DecisionOutcome], dstar: float,
                       lower: float, upper: float,
                       sched: PreprocessSchedule) -> tuple[float, float]:
    """New bracket from one ladder of decisions (snapshot semantics).

    Both endpoints are computed from the bracket as it stood when the
    decision thresholds tau_i = 2^i * lower / k were fixed.  The mixed case
    reads off the first adjacent pair of decisions that pins the thinned
    optimum into a doubling window; both orientations of the boundary are
    handled, since either one yields a valid sandwich certificate.
    """
    ell, p, d = sched.ell, sched.p, sched.delta_update
    if all(kind is DecisionOutcome.UPPER for kind in kinds):
        return (dstar + lower) / 2.0, (4.0 * ell / d) * (dstar + lower)
    if all(kind is DecisionOutcome.LOWER for kind in kinds):
        return (p / 2.0) * (dstar + upper), (2.0 * ell / d) * (dstar + upper)
    for i in range(len(kinds) - 1):
        if kinds[i] is DecisionOutcome.UPPER and kinds[i + 1] is DecisionOutcome.LOWER:
            pinned = 2.0 ** (i + 1) * lower
            return ((p / 2.0) * (dstar + pinned),
                    (2.0 * ell / d) * (dstar + pinned))
    for i in range(len(kinds) - 1):
        if kinds[i] is DecisionOutcome.LOWER and kinds[i + 1] is DecisionOutcome.UPPER:
            # Certificates: OPT' >= p * 2^i * lower and OPT' <= 2^(i+2) * lower.
            return ((dstar + p * 2.0 ** i * lower) / 2.0,
                    (2.0 * ell / d) * (dstar + 2.0 ** (i + 2) * lower))
    raise AssertionError("mixed decisions must contain an adjacent boundary")


def subsample_preprocessing(oracle: OracleHandle, k: int, delta: float,
                            rng: RandomSource) -> Interval:
    """Shrink the bracket on OPT to ratio O(1/delta^2) with O(n) queries.

    While the ratio stays at or above 2e6/delta^2, one iteration thins the
    ground set, runs the decision ladder on the thinned oracle in parallel
    (forked ledgers, folded back as sum-queries / max-rounds), and rewrites
    the bracket from the decision pattern.  Each iteration provably cuts
    the ratio to polylog of itself, so the loop ends after O(log* k)
    iterations.
    """
    if not 0 < delta <= 1:
        raise ValueError(f"delta={delta} outside (0, 1]")
    if k < 1:
        raise ValueError(f"budget k={k} must be at least 1")
    _, dstar = max_singleton(oracle)
    lower, upper = dstar, k * dstar
    r_star = 2e6 / delta**2
    iteration = 0
    while upper / lower >= r_star:
        sched = PreprocessSchedule.for_ratio(upper / lower, delta)
        it_rng = rng.split(iteration)
        keep = subsample_bernoulli(it_rng.split(0), np.arange(oracle.n), 1.0 / sched.ell)
        kinds = []
        ledgers = []
        for i in range(sched.m + 1):
            fork = oracle.fork()
            thinned = fork.restricted(keep)
            tau_i = 2.0 ** i * lower / k
            kinds.append(imprecise_decision(thinned, k, tau_i, sched.p,
                                            sched.delta_decision,
                                            it_rng.split(1 + i)))
            ledgers.append(fork.ledger)
        oracle.ledger.absorb_parallel(ledgers)
        lower, upper = _preprocess_update(kinds, dstar, lower, upper, sched)
        iteration += 1
        if iteration > 200:  # ratio decrease is provably geometric
            raise AssertionError("preprocessing loop failed to contract")
    return Interval(lower, upper)


def subsample_maximization(oracle: OracleHandle, k: int, eps: float,
                           rng: RandomSource) -> Selection:
    """Linear-query maximization: preprocess the bracket, then grid-search.

    Uses error eps/4 for both phases; E[f(S)] >= (1 - 1/e - eps) * OPT with
    O(log n) adaptive rounds and O(n) expected queries.
    """
    if not 0 < eps <= 1:
        raise ValueError(f"eps={eps} outside (0, 1]")
    eps_hat = eps / 4.0
    bracket = subsample_preprocessing(oracle, k, eps_hat, rng.split(0))
    per_element = Interval(bracket.lower / k, bracket.upper / k)
    return exhaustive_maximization(oracle, k, eps_hat, eps_hat, rng.split(1),
                                   interval=per_element)
