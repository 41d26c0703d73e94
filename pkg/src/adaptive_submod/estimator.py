"""Bernoulli-mean testing for threshold sampling.

The estimator decides, from independent indicator draws, whether the mean
of an indicator distribution has dropped below 1 - eps or is still above
1 - 2*eps.  The indicator in question: after inserting a random prefix of
t-1 candidates into the current solution, does a random further candidate
still clear the acceptance threshold?  One draw of that indicator costs
exactly two oracle queries (the set value with and without the probed
element).

Sample count is fixed at m = 16 * ceil(ln(2/delta) / eps^2); with that many
draws the verdict is wrong-sided with probability at most delta.  The test
statistic is the plain sample mean compared against 1 - 1.5*eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracle import OracleHandle, Selection, as_selection, sample_uniform_subset
from .rng import RandomSource


@dataclass
class EstimatorVerdict:
    """Outcome of one mean test; `reduced` means the mean has dropped."""

    reduced: bool
    sample_mean: float
    samples: int

    def __bool__(self) -> bool:
        return self.reduced


def reduced_mean_sample_count(eps: float, delta: float) -> int:
    """Number of indicator draws consumed by one mean test."""
    if not 0 < eps < 1:
        raise ValueError(f"eps={eps} outside (0, 1)")
    if not 0 < delta < 1:
        raise ValueError(f"delta={delta} outside (0, 1)")
    return 16 * math.ceil(math.log(2.0 / delta) / eps**2)


class DtSampler:
    """Draws the prefix-threshold indicator for one (solution, pool, t).

    A draw samples T uniformly from the (t-1)-subsets of `candidates` and x
    uniformly from the remaining candidates, and reports whether the gain of
    x on solution+T is at least tau.  Two oracle queries per draw.
    """

    def __init__(self, oracle: OracleHandle, solution, candidates, t: int,
                 tau: float, rng: RandomSource):
        self.oracle = oracle
        self.solution = as_selection(solution)
        self.candidates = as_selection(candidates)
        self.t = int(t)
        self.tau = float(tau)
        self.rng = rng
        if self.candidates.size == 0:
            raise ValueError("candidate pool is empty")
        if not 1 <= self.t <= self.candidates.size:
            raise ValueError(
                f"t={t} outside [1, |candidates|={self.candidates.size}]")

    def draw_indicator(self) -> int:
        """One literal draw: sample T and x, then two evaluations."""
        prefix = sample_uniform_subset(self.rng, self.candidates, self.t - 1)
        rest = np.setdiff1d(self.candidates, prefix, assume_unique=True)
        x = int(rest[self.rng.generator.integers(0, rest.size)])
        base = np.union1d(self.solution, prefix)
        v1 = self.oracle.evaluate(base)
        v2 = self.oracle.evaluate(np.union1d(base, [x]))
        return int(v2 - v1 >= self.tau)

    def draw_many(self, count: int) -> np.ndarray:
        """`count` independent draws as a 0/1 array (2*count queries)."""
        if self.solution.size == 0:
            gains = self.oracle.pair_marginal_batch(
                self.candidates, self.t, count, self.rng.generator)
        else:
            gains = _pair_marginals_with_solution(
                self.oracle, self.solution, self.candidates, self.t, count,
                self.rng.generator)
        return (gains >= self.tau).astype(np.uint8)


def _pair_marginals_with_solution(oracle, solution, candidates, t, count, gen):
    """Generic two-CSR evaluation with the solution folded into each row."""
    from .oracle import draw_subset_rows

    oracle.ledger.add_queries(2 * count)
    out = np.empty(count, dtype=np.float64)
    s = solution.size
    done = 0
    chunk = max(1, 2_000_000 // max(t + s, 1))
    while done < count:
        c = min(chunk, count - done)
        rows = draw_subset_rows(gen, candidates.size, t, c)
        xpos = gen.integers(0, t, size=c)
        ids = candidates[rows]
        xs = ids[np.arange(c), xpos]
        keep = np.ones((c, t), dtype=bool)
        keep[np.arange(c), xpos] = False
        prefix = ids[keep].reshape(c, t - 1)
        base = np.concatenate([np.tile(solution, (c, 1)), prefix], axis=1)
        base_ptr = np.arange(0, (c + 1) * (s + t - 1), s + t - 1, dtype=np.int64)
        v1 = oracle.objective.value_csr(base.reshape(-1), base_ptr)
        full = np.concatenate([base, xs[:, None]], axis=1)
        full_ptr = np.arange(0, (c + 1) * (s + t), s + t, dtype=np.int64)
        v2 = oracle.objective.value_csr(full.reshape(-1), full_ptr)
        out[done:done + c] = v2 - v1
        done += c
    return out


class BernoulliSource:
    """Synthetic indicator source with a known mean (no oracle attached)."""

    def __init__(self, mean: float, rng: RandomSource):
        if not 0.0 <= mean <= 1.0:
            raise ValueError(f"mean {mean} outside [0, 1]")
        self.mean = mean
        self.rng = rng

    def draw_many(self, count: int) -> np.ndarray:
        return (self.rng.generator.random(count) < self.mean).astype(np.uint8)


def _mean_of(source, m: int) -> float:
    total = 0
    done = 0
    while done < m:
        c = min(1 << 20, m - done)
        total += int(source.draw_many(c).sum())
        done += c
    return total / m


def reduced_mean(source, eps: float, delta: float) -> EstimatorVerdict:
    """Test whether the source mean has dropped below 1 - eps.

    Draws m = 16*ceil(ln(2/delta)/eps^2) samples and reports reduced when
    the sample mean is at most 1 - 1.5*eps.  With probability >= 1 - delta:
    reduced implies mean <= 1 - eps, and not-reduced implies mean >= 1 - 2*eps.
    (For eps >= 2/3 the cut 1 - 1.5*eps is nonpositive, so only an all-zero
    sample can report reduced; the formula is applied as stated.)
    """
    m = reduced_mean_sample_count(eps, delta)
    mean = _mean_of(source, m)
    return EstimatorVerdict(reduced=mean <= 1.0 - 1.5 * eps,
                            sample_mean=mean, samples=m)


def reduced_mean_batched(samplers, eps: float, delta: float) -> list[EstimatorVerdict]:
    """Independent mean tests whose draws share one adaptive round.

    All samplers must probe the same oracle state; their combined
    2 * m * len(samplers) queries are issued as a single batch, so the
    ledger advances by exactly one round.  Verdicts equal independent
    `reduced_mean` calls on each sampler.
    """
    samplers = list(samplers)
    if not samplers:
        raise ValueError("reduced_mean_batched requires at least one sampler")
    oracle = getattr(samplers[0], "oracle", None)
    if oracle is not None:
        for s in samplers[1:]:
            if getattr(s, "oracle", None) is not oracle:
                raise ValueError("batched samplers must share one oracle")
        with oracle.round():
            return [reduced_mean(s, eps, delta) for s in samplers]
    return [reduced_mean(s, eps, delta) for s in samplers]
