"""Submodular cover for integer-valued monotone objectives.

Goal: a small set S with f(S) >= L.  The driver walks a descending ladder
of thresholds tau = D, (1/2) D, (1/4) D, ... starting from the best
singleton value D, and at each rung runs a cover variant of threshold
sampling that keeps batch-adding above-threshold elements until either the
target is met or no element clears the rung.  Because f is integer valued,
a final ladder of unit-threshold passes always closes any remaining gap,
so the returned set is feasible deterministically.  The expected solution
size is O(log(L)) times the optimal cover size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimator import DtSampler, reduced_mean_batched
from .maximize import max_singleton
from .oracle import OracleHandle, Selection, difference, sample_uniform_subset, union
from .rng import RandomSource
from .threshold import scan_sizes


class InfeasibleTargetError(ValueError):
    """The requested target exceeds the value of the full ground set."""


@dataclass(frozen=True)
class CoverConfig:
    """Parameters of one cover-variant threshold-sampling run."""

    target: int
    tau: float
    eps: float
    delta: float

    def __post_init__(self):
        if self.target < 1:
            raise ValueError(f"target {self.target} must be a positive integer")
        if not self.tau > 0:
            raise ValueError(f"threshold tau={self.tau} must be positive")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps={self.eps} outside (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta={self.delta} outside (0, 1)")

    def derived(self, n: int):
        """Like the cardinality version, but the scan grid tops out near n
        (any number of elements may be added at once) and the per-merge cap
        comes from the remaining gap instead of a budget."""
        eps_hat = self.eps / 3.0
        r = math.ceil(math.log(2.0 * n / self.delta) / math.log(1.0 / (1.0 - eps_hat)))
        r = max(r, 1)
        m = max(0, math.ceil(math.log(max(n, 1)) / eps_hat))
        delta_hat = self.delta / (2.0 * r * (m + 1))
        return eps_hat, r, m, delta_hat


@dataclass
class CoverOutcome:
    """Result of one rung; `reached` records whether f(S) hit the target."""

    solution: Selection
    reached: bool
    rounds_used: int
    value: float

    @property
    def size(self) -> int:
        return int(self.solution.size)


def threshold_sampling_for_cover(oracle: OracleHandle, cfg: CoverConfig,
                                 rng: RandomSource) -> CoverOutcome:
    """One rung: add above-threshold batches until the target or exhaustion.

    Identical round structure to plain threshold sampling (filter batch,
    batched scan of mean tests, merge a uniform batch) except that the
    merge size is capped by floor(gap / ((1 - eps/3) * tau)) rather than a
    cardinality budget, and the loop exits early once f(S) >= target.
    """
    n = oracle.n
    if n == 0:
        value = oracle.evaluate([])
        return CoverOutcome(np.empty(0, dtype=np.int64), value >= cfg.target, 0, value)
    eps_hat, r, m, delta_hat = cfg.derived(n)
    solution = np.empty(0, dtype=np.int64)
    pool = np.arange(n, dtype=np.int64)
    conditioned = oracle.shifted(solution)
    value = conditioned.base_value
    rounds_used = 0
    for round_idx in range(r):
        if pool.size == 0 or value >= cfg.target:
            break
        rounds_used += 1
        with oracle.round():
            singles = conditioned.eval_csr(
                pool, np.arange(pool.size + 1, dtype=np.int64))
        pool = pool[singles >= cfg.tau]
        if pool.size == 0:
            break
        sizes = scan_sizes(eps_hat, m, pool.size)
        samplers = [
            DtSampler(conditioned, (), pool, int(t), cfg.tau,
                      rng.split(round_idx, 2 + j))
            for j, t in enumerate(sizes)
        ]
        verdicts = reduced_mean_batched(samplers, eps_hat, delta_hat)
        t_star = int(sizes[-1])
        for t, verdict in zip(sizes, verdicts):
            if verdict.reduced:
                t_star = int(t)
                break
        cap = math.floor((cfg.target - value) / ((1.0 - eps_hat) * cfg.tau))
        take = min(t_star, cap)
        if take > 0:
            chosen = sample_uniform_subset(rng.split(round_idx, 1), pool, take)
            solution = union(solution, chosen)
            pool = difference(pool, chosen)
            conditioned = oracle.shifted(solution)
            value = conditioned.base_value
        if value >= cfg.target:
            break
    return CoverOutcome(solution, value >= cfg.target, rounds_used, value)


def adaptive_greedy_cover(oracle: OracleHandle, target: int,
                          rng: RandomSource) -> Selection:
    """Feasible cover of expected size O(log(target) * optimal).

    Requires an integer-valued monotone objective with f(ground) >= target
    (checked with one query).  Ladder error is fixed at 1/2; each rung runs
    the cover sampler conditioned on the current solution with the residual
    gap as its target.  If the ladder ends short of the target, unit-
    threshold passes finish the job; integrality guarantees each such pass
    gains at least 1, so termination is deterministic.
    """
    target = int(target)
    if target < 1:
        raise ValueError(f"target {target} must be a positive integer")
    n = oracle.n
    total = oracle.evaluate(np.arange(n, dtype=np.int64))
    if total < target:
        raise InfeasibleTargetError(
            f"target {target} exceeds the full ground-set value {total}")
    eps = 0.5
    _, dstar = max_singleton(oracle)
    m = max(0, math.ceil(math.log(max(dstar, 1.0)) / eps))
    delta = 1.0 / (n * (m + 1))
    solution = np.empty(0, dtype=np.int64)
    value = 0.0
    for i in range(m + 1):
        if value >= target:
            break
        tau = (1.0 - eps) ** i * dstar
        conditioned = oracle.shifted(solution)
        value = conditioned.base_value
        gap = target - value
        if gap <= 0:
            break
        outcome = threshold_sampling_for_cover(
            conditioned, CoverConfig(target=math.ceil(gap), tau=tau, eps=eps,
                                     delta=delta), rng.split(i))
        solution = union(solution, outcome.solution)
        value = conditioned.base_value + outcome.value
    cleanup = 0
    while value < target:
        conditioned = oracle.shifted(solution)
        value = conditioned.base_value
        gap = target - value
        if gap <= 0:
            break
        outcome = threshold_sampling_for_cover(
            conditioned, CoverConfig(target=math.ceil(gap), tau=1.0, eps=eps,
                                     delta=delta), rng.split(m + 1 + cleanup))
        if outcome.size == 0 and outcome.value <= 0:
            raise AssertionError("unit-threshold pass made no progress on an "
                                 "integer-valued feasible instance")
        solution = union(solution, outcome.solution)
        value = conditioned.base_value + outcome.value
        cleanup += 1
    return solution
