"""Compiled inner loops for batched objective evaluation.

Coverage values reduce to OR-ing per-element point bitmasks and counting
(or weighting) the set bits.  The segment loops below are the only parts
of the package hot enough to need compilation; everything falls back to
pure numpy when numba is unavailable.
"""
from __future__ import annotations

import os

import numpy as np

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return (x * _H01) >> np.uint64(56)


@njit(cache=True)
def _cov_unit_value_csr(masks, indices, indptr, out):
    words = masks.shape[1]
    acc = np.empty(words, dtype=np.uint64)
    for r in range(indptr.shape[0] - 1):
        for w in range(words):
            acc[w] = np.uint64(0)
        for j in range(indptr[r], indptr[r + 1]):
            row = indices[j]
            for w in range(words):
                acc[w] |= masks[row, w]
        total = np.uint64(0)
        for w in range(words):
            total += _popcount(acc[w])
        out[r] = total


@njit(cache=True)
def _cov_unit_pair_marginals(masks, t_indices, t_indptr, x_ids, out):
    words = masks.shape[1]
    acc = np.empty(words, dtype=np.uint64)
    for r in range(t_indptr.shape[0] - 1):
        for w in range(words):
            acc[w] = np.uint64(0)
        for j in range(t_indptr[r], t_indptr[r + 1]):
            row = t_indices[j]
            for w in range(words):
                acc[w] |= masks[row, w]
        gain = np.uint64(0)
        x = x_ids[r]
        for w in range(words):
            gain += _popcount(masks[x, w] & ~acc[w])
        out[r] = gain


_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_BASE = np.uint64(0xD1B54A32D192ED03)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _splitmix(state):
    z = state
    z = (z ^ (z >> np.uint64(30))) * _SM_M1
    z = (z ^ (z >> np.uint64(27))) * _SM_M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, parallel=True)
def _cov_unit_pair_sample(masks, pool, t, seed, out):
    """Fused draw-and-evaluate of sampled pair marginals on unit coverage.

    Draw i derives its own counter-based stream from (seed, i), so the
    result is independent of thread scheduling.  Each draw takes an ordered
    uniform tuple of t distinct pool positions: the first t-1 form the
    random prefix, the last is the probed element.
    """
    count = out.shape[0]
    words = masks.shape[1]
    pool_size = np.uint64(pool.shape[0])
    blocks = (count + 1023) // 1024
    for b in prange(blocks):
        chosen = np.empty(t, np.int64)
        acc = np.empty(words, np.uint64)
        start = b * 1024
        end = min(count, start + 1024)
        for i in range(start, end):
            state = _splitmix(np.uint64(seed) + np.uint64(i) * _SM_BASE)
            for j in range(t):
                while True:
                    state = state + _SM_GAMMA
                    pos = np.int64(_splitmix(state) % pool_size)
                    fresh = True
                    for q in range(j):
                        if chosen[q] == pos:
                            fresh = False
                            break
                    if fresh:
                        break
                chosen[j] = pos
            for w in range(words):
                acc[w] = np.uint64(0)
            for j in range(t - 1):
                row = pool[chosen[j]]
                for w in range(words):
                    acc[w] |= masks[row, w]
            x = pool[chosen[t - 1]]
            gain = np.uint64(0)
            for w in range(words):
                gain += _popcount(masks[x, w] & ~acc[w])
            out[i] = gain


def cov_unit_pair_sample(masks: np.ndarray, pool: np.ndarray, t: int,
                         seed: int, count: int) -> np.ndarray | None:
    """Sampled pair marginals with in-kernel draws, or None if unsupported."""
    if not HAVE_NUMBA or t > 24:
        return None
    out = np.empty(count, dtype=np.float64)
    _cov_unit_pair_sample(masks, pool, np.int64(t), np.uint64(seed), out)
    return out


def cov_unit_value_csr(masks: np.ndarray, indices: np.ndarray,
                       indptr: np.ndarray) -> np.ndarray:
    out = np.empty(len(indptr) - 1, dtype=np.float64)
    if HAVE_NUMBA:
        _cov_unit_value_csr(masks, indices, indptr, out)
        return out
    ors = segment_or(masks, indices, indptr)
    out[:] = np.bitwise_count(ors).sum(axis=1)
    return out


def cov_unit_pair_marginals(masks: np.ndarray, t_indices: np.ndarray,
                            t_indptr: np.ndarray, x_ids: np.ndarray) -> np.ndarray:
    out = np.empty(len(x_ids), dtype=np.float64)
    if HAVE_NUMBA:
        _cov_unit_pair_marginals(masks, t_indices, t_indptr, x_ids, out)
        return out
    ors = segment_or(masks, t_indices, t_indptr)
    fresh = masks[x_ids] & ~ors
    out[:] = np.bitwise_count(fresh).sum(axis=1)
    return out


def segment_or(masks: np.ndarray, indices: np.ndarray,
               indptr: np.ndarray) -> np.ndarray:
    """OR of mask rows per CSR segment (empty segments give all-zero)."""
    rows = len(indptr) - 1
    out = np.zeros((rows, masks.shape[1]), dtype=np.uint64)
    if len(indices) == 0:
        return out
    starts = indptr[:-1]
    empty = starts == indptr[1:]
    safe = np.minimum(starts, len(indices) - 1)
    reduced = np.bitwise_or.reduceat(masks[indices], safe, axis=0)
    reduced[empty] = 0
    out[:] = reduced
    return out


def segment_sum(values: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Sum of values per CSR segment, safe for empty segments."""
    cs = np.zeros(len(values) + 1, dtype=np.float64)
    np.cumsum(values, out=cs[1:])
    return cs[indptr[1:]] - cs[indptr[:-1]]


def segment_max_rows(matrix: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Columnwise max of matrix rows per CSR segment (empty -> zeros)."""
    rows = len(indptr) - 1
    out = np.zeros((rows, matrix.shape[1]), dtype=matrix.dtype)
    if matrix.shape[0] == 0:
        return out
    starts = indptr[:-1]
    empty = starts == indptr[1:]
    safe = np.minimum(starts, matrix.shape[0] - 1)
    reduced = np.maximum.reduceat(matrix, safe, axis=0)
    reduced[empty] = 0
    out[:] = reduced
    return out
