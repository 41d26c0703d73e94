"""Reference algorithms: classical greedy, lazy greedy, brute force.

The greedy pair provides the (1 - 1/e) baseline that the randomized
drivers are compared against; the brute-force routines provide exact
optima on desk-scale instances and are the ground truth for every
approximation check in the test suite.  Enumeration sizes are guarded --
callers get an explicit error instead of an unbounded search.
"""
from __future__ import annotations

import heapq
import itertools
import math

import numpy as np

from .oracle import OracleHandle, Selection


class EnumerationLimitError(ValueError):
    """The requested exhaustive enumeration exceeds the safety budget."""


def greedy(oracle: OracleHandle, k: int) -> Selection:
    """k steps of argmax-marginal selection; ties go to the lowest id.

    Step i issues one batch of n - i queries (adaptive rounds = k).  The
    running value is tracked from the selected gains, which assumes the
    objective is normalized (f of the empty set is 0) -- true for every
    instance family in this package.
    """
    n = oracle.n
    if not 0 <= k <= n:
        raise ValueError(f"budget k={k} outside [0, n={n}]")
    chosen: list[int] = []
    value = 0.0
    remaining = np.arange(n, dtype=np.int64)
    for _ in range(k):
        sol = np.array(sorted(chosen), dtype=np.int64)
        width = sol.size + 1
        with oracle.round():
            rows = np.concatenate([np.tile(sol, (remaining.size, 1)),
                                   remaining[:, None]], axis=1)
            indptr = np.arange(0, (remaining.size + 1) * width, width,
                               dtype=np.int64)
            values = oracle.eval_csr(rows.reshape(-1), indptr)
        best = int(np.argmax(values))  # first max = lowest id
        value = float(values[best])
        chosen.append(int(remaining[best]))
        remaining = np.delete(remaining, best)
    return np.array(sorted(chosen), dtype=np.int64)


def lazy_greedy(oracle: OracleHandle, k: int) -> Selection:
    """Greedy with stale-bound reuse; identical output, fewer queries.

    Keeps a max-heap of upper bounds on marginal gains (valid by
    submodularity).  A popped entry whose bound was computed against the
    current solution is selected outright; otherwise its gain is refreshed
    with one query and pushed back.  Refreshes are issued as singleton
    batches because each depends on the previous pop.
    """
    n = oracle.n
    if not 0 <= k <= n:
        raise ValueError(f"budget k={k} outside [0, n={n}]")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    ids = np.arange(n, dtype=np.int64)
    with oracle.round():
        values = oracle.eval_csr(ids, np.arange(n + 1, dtype=np.int64))
    heap = [(-float(v), int(i), 0) for i, v in zip(ids, values)]
    heapq.heapify(heap)
    chosen: list[int] = []
    value = 0.0
    while len(chosen) < k:
        bound, x, stamp = heapq.heappop(heap)
        if stamp == len(chosen):
            chosen.append(x)
            value -= bound
            continue
        sol = np.array(sorted(chosen), dtype=np.int64)
        with oracle.round():
            new_val = oracle.eval_csr(
                np.append(sol, x), np.array([0, sol.size + 1], dtype=np.int64))[0]
        heapq.heappush(heap, (-(float(new_val) - value), x, len(chosen)))
    return np.array(sorted(chosen), dtype=np.int64)


def _check_enumeration(count: float, what: str) -> None:
    if count > 1e6:
        raise EnumerationLimitError(
            f"{what} would evaluate {count:.3g} subsets (limit 1e6)")


def brute_force_max(oracle: OracleHandle, k: int) -> tuple[Selection, float]:
    """Exact maximum over all subsets of size at most k.

    Returns (best_set, best_value) with the lexicographically least
    maximizer.  Guarded to at most 1e6 evaluations.
    """
    n = oracle.n
    if not 0 <= k <= n:
        raise ValueError(f"budget k={k} outside [0, n={n}]")
    total = sum(math.comb(n, i) for i in range(k + 1))
    _check_enumeration(total, f"brute_force_max(n={n}, k={k})")
    best_set: tuple[int, ...] = ()
    best_value = -math.inf
    for size in range(k + 1):
        combos = list(itertools.combinations(range(n), size))
        if not combos:
            continue
        flat = np.array([x for c in combos for x in c], dtype=np.int64)
        indptr = np.arange(0, (len(combos) + 1) * size, max(size, 1), dtype=np.int64) \
            if size else np.zeros(len(combos) + 1, dtype=np.int64)
        with oracle.round():
            values = oracle.eval_csr(flat, indptr)
        for combo, v in zip(combos, values):
            v = float(v)
            if v > best_value or (v == best_value and combo < best_set):
                best_value, best_set = v, combo
    return np.array(best_set, dtype=np.int64), best_value


def brute_force_cover(oracle: OracleHandle, target: float) -> tuple[Selection, float]:
    """Exact minimum-cardinality set with f(S) >= target.

    Returns (best_set, its value); the set is the lexicographically least
    one among the smallest feasible sets.  Guarded to 2^n <= 1e6.
    Raises if no subset reaches the target.
    """
    n = oracle.n
    _check_enumeration(2.0 ** n, f"brute_force_cover(n={n})")
    for size in range(n + 1):
        combos = list(itertools.combinations(range(n), size))
        flat = np.array([x for c in combos for x in c], dtype=np.int64)
        indptr = np.arange(0, (len(combos) + 1) * size, max(size, 1), dtype=np.int64) \
            if size else np.zeros(len(combos) + 1, dtype=np.int64)
        with oracle.round():
            values = oracle.eval_csr(flat, indptr)
        for combo, v in zip(combos, values):
            if float(v) >= target:
                return np.array(combo, dtype=np.int64), float(v)
    raise ValueError(f"no subset reaches the target {target}")
