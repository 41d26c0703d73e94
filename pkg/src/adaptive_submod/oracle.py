"""Instrumented access to a monotone submodular set function.

All algorithms in this package talk to the objective through an
OracleHandle, which keeps a QueryLedger with two monotone counters:

  total_queries   -- number of individual set-function evaluations, and
  adaptive_rounds -- number of batches of evaluations, where everything
                     inside one batch depends only on state fixed before
                     the batch and could therefore run in parallel.

Accounting contract:

  * ``evaluate`` charges exactly one query and never a round.
  * ``evaluate_batch`` charges one query per member and exactly one round,
    regardless of batch size.  Algorithms express each conceptual parallel
    round as one batch, which makes round counts directly measurable.
  * Derived oracles (shifted / restricted views) charge the parent ledger:
    one query per evaluation, and one query at construction of a shifted
    view for the cached base value.

Subsets are plain integer arrays over a dense ground set [0, n).  The
objective behind a handle is any object exposing ``value_csr`` (batched
evaluation over a CSR-encoded list of subsets); optional ``shift`` /
``restrict`` / ``pair_marginal_batch`` hooks let concrete objectives
evaluate derived views and sampled marginals without per-row Python cost.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .rng import RandomSource

Selection = np.ndarray  # sorted int64 ids, no duplicates


def as_selection(members) -> Selection:
    """Canonicalize an iterable of element ids into a sorted int64 array."""
    arr = np.asarray(list(members) if not isinstance(members, np.ndarray) else members)
    if arr.size == 0:
        return np.empty(0, dtype=np.int64)
    arr = arr.astype(np.int64, copy=False)
    return np.sort(arr)


def union(a: Selection, b: Selection) -> Selection:
    return np.union1d(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))


def difference(a: Selection, b: Selection) -> Selection:
    return np.setdiff1d(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64),
                        assume_unique=False)


@dataclass
class QueryLedger:
    """Exact accounting of oracle cost.  Both counters only ever grow."""

    total_queries: int = 0
    adaptive_rounds: int = 0

    def add_queries(self, count: int) -> None:
        if count < 0:
            raise ValueError("query count cannot decrease")
        self.total_queries += int(count)

    def bump_round(self) -> None:
        self.adaptive_rounds += 1

    def absorb_parallel(self, children: "list[QueryLedger]") -> None:
        """Fold the ledgers of independent parallel branches into this one.

        Queries add up across branches; rounds advance only by the deepest
        branch, since the branches could have run side by side.
        """
        if children:
            self.total_queries += sum(c.total_queries for c in children)
            self.adaptive_rounds += max(c.adaptive_rounds for c in children)


class _ShiftedView:
    """Generic g(T) = f(base | T) - f(base) for objectives without `shift`."""

    def __init__(self, inner, base: Selection, base_value: float):
        self.inner = inner
        self.base = np.asarray(base, dtype=np.int64)
        self.base_value = base_value
        self.n = inner.n

    def value_csr(self, indices, indptr):
        nb = len(self.base)
        lengths = np.diff(indptr)
        rows = len(lengths)
        out_ptr = np.zeros(rows + 1, dtype=np.int64)
        np.cumsum(lengths + nb, out=out_ptr[1:])
        out_idx = np.empty(out_ptr[-1], dtype=np.int64)
        starts = out_ptr[:-1]
        for r in range(rows):  # row counts here are small in the generic path
            s = starts[r]
            out_idx[s:s + nb] = self.base
            out_idx[s + nb:s + nb + lengths[r]] = indices[indptr[r]:indptr[r + 1]]
        return self.inner.value_csr(out_idx, out_ptr) - self.base_value


class _RestrictedView:
    """Objective over a remapped dense subset of the parent ground set."""

    def __init__(self, inner, keep: Selection):
        self.inner = inner
        self.keep = np.asarray(keep, dtype=np.int64)
        self.n = len(self.keep)

    def value_csr(self, indices, indptr):
        return self.inner.value_csr(self.keep[np.asarray(indices, dtype=np.int64)], indptr)


class OracleHandle:
    """Evaluation oracle plus ledger over a ground set of size n.

    A handle may be shared by concurrent workers for evaluation; ledger
    updates for a batch are applied once, after the batch completes.  The
    drivers in this package are single-threaded orchestrators issuing
    batches, so no locking is needed here.
    """

    def __init__(self, objective, ledger: QueryLedger | None = None):
        self.objective = objective
        self.ledger = ledger if ledger is not None else QueryLedger()

    @property
    def n(self) -> int:
        return self.objective.n

    # -- raw evaluation ----------------------------------------------------

    def _validate(self, sel) -> Selection:
        arr = as_selection(sel)
        if arr.size:
            if arr[0] < 0 or arr[-1] >= self.n:
                raise ValueError(f"element id outside ground set [0, {self.n})")
            if arr.size > 1 and np.any(arr[1:] == arr[:-1]):
                raise ValueError("duplicate element ids in selection")
        return arr

    def evaluate(self, selection) -> float:
        """f(selection).  One query; rounds are only marked by batches."""
        arr = self._validate(selection)
        self.ledger.add_queries(1)
        indptr = np.array([0, arr.size], dtype=np.int64)
        return float(self.objective.value_csr(arr, indptr)[0])

    def evaluate_batch(self, selections) -> list[float]:
        """f on each selection, order preserving.  One adaptive round."""
        sels = list(selections)
        if not sels:
            raise ValueError("evaluate_batch requires a nonempty list of queries")
        arrs = [self._validate(s) for s in sels]
        with self.round():
            indptr = np.zeros(len(arrs) + 1, dtype=np.int64)
            np.cumsum([a.size for a in arrs], out=indptr[1:])
            indices = np.concatenate(arrs) if indptr[-1] else np.empty(0, dtype=np.int64)
            values = self.eval_csr(indices, indptr)
        return [float(v) for v in values]

    def eval_csr(self, indices, indptr) -> np.ndarray:
        """Batched evaluation over pre-validated CSR rows.  No round mark."""
        rows = len(indptr) - 1
        self.ledger.add_queries(rows)
        return self.objective.value_csr(np.asarray(indices, dtype=np.int64),
                                        np.asarray(indptr, dtype=np.int64))

    @contextmanager
    def round(self):
        """Mark everything evaluated inside the block as one adaptive round."""
        yield self
        self.ledger.bump_round()

    # -- derived quantities --------------------------------------------------

    def marginal(self, x: int, base) -> float:
        """f(base | {x}) - f(base).

        Two queries, except that x already in base short-circuits to 0.0
        without querying (the value is forced analytically).
        """
        arr = self._validate(base)
        if not 0 <= int(x) < self.n:
            raise ValueError(f"element id {x} outside ground set [0, {self.n})")
        if arr.size and np.searchsorted(arr, x) < arr.size and arr[np.searchsorted(arr, x)] == x:
            return 0.0
        with_x = np.sort(np.append(arr, np.int64(x)))
        self.ledger.add_queries(2)
        indptr = np.array([0, arr.size, arr.size + with_x.size], dtype=np.int64)
        vals = self.objective.value_csr(np.concatenate([arr, with_x]), indptr)
        return float(vals[1] - vals[0])

    def shifted(self, base) -> "OracleHandle":
        """Oracle for g(T) = f(base | T) - f(base), charging this ledger.

        The base value is evaluated (and charged) once here; afterwards each
        evaluation of g costs a single query.  The handle's ``base_value``
        attribute carries f(base).
        """
        arr = self._validate(base)
        self.ledger.add_queries(1)
        shift = getattr(self.objective, "shift", None)
        if shift is not None:
            view, base_value = shift(arr)
        else:
            indptr = np.array([0, arr.size], dtype=np.int64)
            base_value = float(self.objective.value_csr(arr, indptr)[0])
            view = _ShiftedView(self.objective, arr, base_value)
        handle = OracleHandle(view, self.ledger)
        handle.base_value = float(base_value)
        return handle

    def restricted(self, keep) -> "OracleHandle":
        """Oracle over the sub-ground-set `keep`, with dense remapped ids.

        Local id i corresponds to the i-th smallest kept parent id.
        Evaluations translate to parent ids and charge this ledger.
        """
        arr = self._validate(keep)
        restrict = getattr(self.objective, "restrict", None)
        view = restrict(arr) if restrict is not None else _RestrictedView(self.objective, arr)
        return OracleHandle(view, self.ledger)

    def fork(self) -> "OracleHandle":
        """Same objective, fresh ledger; for independent parallel branches."""
        return OracleHandle(self.objective, QueryLedger())

    # -- sampled marginals (hot path of the mean estimator) -----------------

    def pair_marginal_batch(self, pool: Selection, t: int, count: int,
                            gen: np.random.Generator) -> np.ndarray:
        """Marginals Delta(x, T) for `count` independent draws.

        Each draw takes T as a uniform (t-1)-subset of `pool` and x uniform
        over pool minus T, and costs exactly two queries.  Objectives may
        provide a distributionally identical fast path; otherwise the draws
        are materialized and evaluated as two CSR batches.
        """
        pool = np.asarray(pool, dtype=np.int64)
        if not 1 <= t <= pool.size:
            raise ValueError(f"draw size t={t} outside [1, |pool|={pool.size}]")
        self.ledger.add_queries(2 * count)
        fast = getattr(self.objective, "pair_marginal_batch", None)
        if fast is not None:
            got = fast(pool, t, count, gen)
            if got is not None:
                return got
        return _generic_pair_marginals(self.objective, pool, t, count, gen)


def _generic_pair_marginals(objective, pool, t, count, gen):
    out = np.empty(count, dtype=np.float64)
    done = 0
    chunk_rows = max(1, 2_000_000 // max(t, 1))
    while done < count:
        c = min(chunk_rows, count - done)
        rows = draw_subset_rows(gen, pool.size, t, c)          # (c, t) distinct
        xpos = gen.integers(0, t, size=c)
        ids = pool[rows]
        xs = ids[np.arange(c), xpos]
        # T = row minus the x position
        keep = np.ones((c, t), dtype=bool)
        keep[np.arange(c), xpos] = False
        t_ids = ids[keep].reshape(c, t - 1) if t > 1 else np.empty((c, 0), dtype=np.int64)
        base_ptr = np.arange(0, (c + 1) * (t - 1), t - 1, dtype=np.int64) if t > 1 \
            else np.zeros(c + 1, dtype=np.int64)
        v1 = objective.value_csr(t_ids.reshape(-1), base_ptr)
        full = np.concatenate([t_ids, xs[:, None]], axis=1)
        full_ptr = np.arange(0, (c + 1) * t, t, dtype=np.int64)
        v2 = objective.value_csr(full.reshape(-1), full_ptr)
        out[done:done + c] = v2 - v1
        done += c
    return out


# -- sampling primitives ----------------------------------------------------

def sample_uniform_subset(rng: RandomSource, pool, t: int) -> Selection:
    """A uniformly random size-t subset of pool, without replacement."""
    arr = as_selection(pool)
    t = int(t)
    if not 0 <= t <= arr.size:
        raise ValueError(f"subset size {t} outside [0, {arr.size}]")
    if t == 0:
        return np.empty(0, dtype=np.int64)
    if t == arr.size:
        return arr.copy()
    picked = rng.generator.choice(arr, size=t, replace=False)
    return np.sort(picked)


def subsample_bernoulli(rng: RandomSource, pool, prob: float) -> Selection:
    """Retain each element of pool independently with probability prob."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"retention probability {prob} outside [0, 1]")
    arr = as_selection(pool)
    if prob == 0.0:
        return np.empty(0, dtype=np.int64)
    if prob == 1.0:
        return arr.copy()
    mask = rng.generator.random(arr.size) < prob
    return arr[mask]


def draw_subset_rows(gen: np.random.Generator, pool_size: int, t: int,
                     count: int) -> np.ndarray:
    """`count` independent uniform t-subsets of range(pool_size), one per row.

    Row order is not significant (each row is a uniformly random set).  Uses
    rejection sampling for small t and partial permutations otherwise; both
    are exactly uniform.
    """
    if not 1 <= t <= pool_size:
        raise ValueError(f"subset size {t} outside [1, {pool_size}]")
    if t == pool_size:
        return np.tile(np.arange(pool_size, dtype=np.int64), (count, 1))
    if t * (t - 1) <= pool_size:
        # Rejection: redraw rows containing duplicates; acceptance stays
        # >= exp(-1/2) in this regime, and accepted rows are uniform over
        # distinct tuples.
        rows = np.sort(gen.integers(0, pool_size, size=(count, t), dtype=np.int64), axis=1)
        bad = np.flatnonzero((rows[:, 1:] == rows[:, :-1]).any(axis=1)) \
            if t > 1 else np.empty(0, np.int64)
        while bad.size:
            redraw = np.sort(gen.integers(0, pool_size, size=(bad.size, t), dtype=np.int64), axis=1)
            rows[bad] = redraw
            still = (redraw[:, 1:] == redraw[:, :-1]).any(axis=1)
            bad = bad[still]
        return rows
    if 2 * t > pool_size:
        # Draw the complement instead, then invert; keeps the work at
        # O(min(t, pool-t)) per row.
        comp = draw_subset_rows(gen, pool_size, pool_size - t, count)
        out = np.empty((count, t), dtype=np.int64)
        step = max(1, 4_000_000 // pool_size)
        for lo in range(0, count, step):
            hi = min(count, lo + step)
            full = np.ones((hi - lo, pool_size), dtype=bool)
            np.put_along_axis(full, comp[lo:hi], False, axis=1)
            out[lo:hi] = np.nonzero(full)[1].reshape(hi - lo, t)
        return out
    # Mid-range t: first t entries of a random permutation per row, in
    # memory-bounded chunks.
    out = np.empty((count, t), dtype=np.int64)
    step = max(1, 8_000_000 // pool_size)
    for lo in range(0, count, step):
        hi = min(count, lo + step)
        keys = gen.random((hi - lo, pool_size))
        out[lo:hi] = np.argpartition(keys, t, axis=1)[:, :t]
    return out
