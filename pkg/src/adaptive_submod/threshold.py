"""Threshold sampling: batch-add random candidate subsets above a threshold.

Given a threshold tau and budget k, the routine repeatedly (for at most r
rounds) filters the candidate pool down to elements whose current marginal
gain is at least tau, scans a geometric grid of sample sizes to find the
largest t at which a random t-th insertion still tends to clear tau, and
merges a uniformly random subset of that size into the solution.  Each
round therefore costs two adaptive rounds: one filter batch and one batched
scan of mean tests.

With probability at least 1 - delta the result satisfies: expected average
contribution per chosen element at least (1 - eps) * tau, and, when the
budget was not filled, no remaining element has marginal gain >= tau.
Expected query cost of the filters is O(n / eps).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimator import DtSampler, reduced_mean_batched
from .oracle import (OracleHandle, Selection, difference, sample_uniform_subset,
                     union)
from .rng import RandomSource


@dataclass(frozen=True)
class ThresholdConfig:
    """Parameters of one threshold-sampling run."""

    k: int
    tau: float
    eps: float
    delta: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"budget k={self.k} must be at least 1")
        if not self.tau > 0:
            raise ValueError(f"threshold tau={self.tau} must be positive")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps={self.eps} outside (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta={self.delta} outside (0, 1)")

    def derived(self, n: int):
        """(eps_hat, rounds r, scan exponent bound m, per-test delta_hat)."""
        eps_hat = self.eps / 3.0
        r = math.ceil(math.log(2.0 * n / self.delta) / math.log(1.0 / (1.0 - eps_hat)))
        r = max(r, 1)
        m = max(0, math.ceil(math.log(max(self.k, 1)) / eps_hat))
        delta_hat = self.delta / (2.0 * r * (m + 1))
        return eps_hat, r, m, delta_hat


@dataclass
class ThresholdOutcome:
    """Result of a run, plus the accounting needed by callers and tests."""

    solution: Selection
    exhausted: bool
    rounds_used: int
    value: float
    filter_queries: int = 0

    @property
    def size(self) -> int:
        return int(self.solution.size)


def scan_sizes(eps_hat: float, m: int, pool_size: int) -> np.ndarray:
    """Deduplicated geometric grid min(floor((1+eps_hat)^i), pool) for i<=m."""
    sizes = np.floor((1.0 + eps_hat) ** np.arange(m + 1)).astype(np.int64)
    sizes = np.minimum(sizes, pool_size)
    return np.unique(sizes)


def round_filter(oracle: OracleHandle, solution, candidates, tau: float,
                 solution_value: float | None = None) -> Selection:
    """Candidates whose marginal gain on `solution` is at least tau.

    Issues one batch of |candidates| queries against the cached solution
    value; when the caller does not supply it, one extra query fetches it.
    """
    cands = np.asarray(candidates, dtype=np.int64)
    if cands.size == 0:
        return cands.copy()
    sol = np.asarray(solution, dtype=np.int64)
    if solution_value is None:
        solution_value = oracle.evaluate(sol)
    with oracle.round():
        rows = np.concatenate([np.tile(sol, (cands.size, 1)),
                               cands[:, None]], axis=1)
        width = sol.size + 1
        indptr = np.arange(0, (cands.size + 1) * width, width, dtype=np.int64)
        values = oracle.eval_csr(rows.reshape(-1), indptr)
    return cands[values - solution_value >= tau]


def threshold_sampling(oracle: OracleHandle, cfg: ThresholdConfig,
                       rng: RandomSource) -> ThresholdOutcome:
    """Build a solution of size at most k out of above-threshold elements."""
    n = oracle.n
    if n == 0:
        value = oracle.evaluate([])
        return ThresholdOutcome(np.empty(0, dtype=np.int64), True, 0, value)
    eps_hat, r, m, delta_hat = cfg.derived(n)
    solution = np.empty(0, dtype=np.int64)
    pool = np.arange(n, dtype=np.int64)
    conditioned = oracle.shifted(solution)
    value = conditioned.base_value
    exhausted = False
    rounds_used = 0
    filter_queries = 0
    for round_idx in range(r):
        if pool.size == 0:
            exhausted = True
            break
        rounds_used += 1
        filter_queries += pool.size
        with oracle.round():
            singles = conditioned.eval_csr(
                pool, np.arange(pool.size + 1, dtype=np.int64))
        pool = pool[singles >= cfg.tau]
        if pool.size == 0:
            exhausted = True
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
        take = min(t_star, cfg.k - solution.size)
        chosen = sample_uniform_subset(rng.split(round_idx, 1), pool, take)
        solution = union(solution, chosen)
        pool = difference(pool, chosen)
        conditioned = oracle.shifted(solution)
        value = conditioned.base_value
        if solution.size >= cfg.k:
            break
    return ThresholdOutcome(solution, exhausted, rounds_used, value,
                            filter_queries)
