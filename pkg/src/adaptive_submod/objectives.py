"""Concrete monotone submodular objectives and instance files.

Three families cover the benchmarking needs of the package:

  * weighted coverage  f(S) = total weight of universe points covered by S
    (integer-valued with unit weights, which the cover algorithms require),
  * facility location  f(S) = sum over clients of the best similarity to S,
  * additive           f(S) = sum of member weights (modular; its optima
    have closed forms, making it the analytically exact test objective).

Instances are immutable after construction and freely shareable.  Each one
supports batched evaluation over CSR-encoded subset lists plus `shift` /
`restrict` hooks producing derived instances of the same family, so the
oracle layer can evaluate conditioned and subsampled views at native speed.
Coverage stores per-element point sets as packed bitmasks; unit-weight
values are bit counts of OR-ed masks.
"""
from __future__ import annotations

import json

import numpy as np

from . import _kernels
from .oracle import as_selection, draw_subset_rows
from .rng import RandomSource


class InstanceFormatError(ValueError):
    """Raised when an instance file is malformed or inconsistent."""


def _pack_sets(sets, universe_size: int) -> np.ndarray:
    words = max(1, (universe_size + 63) // 64)
    masks = np.zeros((len(sets), words), dtype=np.uint64)
    for i, pts in enumerate(sets):
        pts = np.asarray(pts, dtype=np.int64)
        if pts.size == 0:
            continue
        if pts.min() < 0 or pts.max() >= universe_size:
            raise InstanceFormatError(
                f"set {i} has point index outside [0, {universe_size})")
        np.bitwise_or.at(masks[i], pts >> 6,
                         np.uint64(1) << (pts & 63).astype(np.uint64))
    return masks


def _weighted_bit_values(masks: np.ndarray, weights: np.ndarray,
                         universe_size: int) -> np.ndarray:
    bits = np.unpackbits(masks.view(np.uint8), axis=1,
                         bitorder="little")[:, :universe_size]
    return bits.astype(np.float64) @ weights


class CoverageInstance:
    """Weighted maximum coverage; monotone submodular by construction."""

    kind = "coverage"

    def __init__(self, universe_size: int, weights, sets):
        self.universe_size = int(universe_size)
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.shape != (self.universe_size,):
            raise InstanceFormatError("weights length must equal universe_size")
        if np.any(self.weights < 0):
            raise InstanceFormatError("coverage weights must be nonnegative")
        self.sets = [np.unique(np.asarray(s, dtype=np.int64)) for s in sets]
        self.masks = _pack_sets(self.sets, self.universe_size)
        self.unit = bool(np.all(self.weights == 1.0))

    @classmethod
    def _from_masks(cls, universe_size, weights, masks, sets=None):
        inst = cls.__new__(cls)
        inst.universe_size = int(universe_size)
        inst.weights = weights
        inst.sets = sets
        inst.masks = masks
        inst.unit = bool(np.all(weights == 1.0))
        return inst

    @property
    def n(self) -> int:
        return self.masks.shape[0]

    def value(self, selection) -> float:
        ids = as_selection(selection)
        return float(self.value_csr(ids, np.array([0, ids.size], dtype=np.int64))[0])

    def value_csr(self, indices, indptr) -> np.ndarray:
        if self.unit:
            return _kernels.cov_unit_value_csr(self.masks, indices, indptr)
        ors = _kernels.segment_or(self.masks, indices, indptr)
        return _weighted_bit_values(ors, self.weights, self.universe_size)

    def shift(self, base):
        base = np.asarray(base, dtype=np.int64)
        covered = np.zeros(self.masks.shape[1], dtype=np.uint64)
        if base.size:
            covered = np.bitwise_or.reduce(self.masks[base], axis=0)
        base_value = float(_weighted_bit_values(covered[None, :], self.weights,
                                                self.universe_size)[0])
        derived = CoverageInstance._from_masks(
            self.universe_size, self.weights, self.masks & ~covered)
        return derived, base_value

    def restrict(self, keep):
        keep = np.asarray(keep, dtype=np.int64)
        sets = [self.sets[i] for i in keep] if self.sets is not None else None
        return CoverageInstance._from_masks(
            self.universe_size, self.weights, self.masks[keep], sets)

    def pair_marginal_batch(self, pool, t, count, gen):
        if not self.unit:
            return None
        fused = _kernels.cov_unit_pair_sample(
            self.masks, pool, t, int(gen.integers(0, 1 << 63)), count)
        if fused is not None:
            return fused
        out = np.empty(count, dtype=np.float64)
        done = 0
        chunk = max(1, 4_000_000 // max(t, 1))
        while done < count:
            c = min(chunk, count - done)
            rows = draw_subset_rows(gen, pool.size, t, c)
            xpos = gen.integers(0, t, size=c)
            ids = pool[rows]
            xs = ids[np.arange(c), xpos]
            if t > 1:
                keep = np.ones((c, t), dtype=bool)
                keep[np.arange(c), xpos] = False
                t_flat = ids[keep]
                t_ptr = np.arange(0, (c + 1) * (t - 1), t - 1, dtype=np.int64)
            else:
                t_flat = np.empty(0, dtype=np.int64)
                t_ptr = np.zeros(c + 1, dtype=np.int64)
            out[done:done + c] = _kernels.cov_unit_pair_marginals(
                self.masks, t_flat, t_ptr, xs)
            done += c
        return out

    def to_dict(self) -> dict:
        if self.sets is None:
            raise InstanceFormatError("derived coverage instances are not serializable")
        return {
            "kind": "coverage",
            "n": self.n,
            "universe_size": self.universe_size,
            "weights": [_encode_real(w) for w in self.weights],
            "sets": [s.tolist() for s in self.sets],
        }


class FacilityInstance:
    """Facility location over a nonnegative element-by-client similarity."""

    kind = "facility"

    def __init__(self, similarity):
        self.similarity = np.asarray(similarity, dtype=np.float64)
        if self.similarity.ndim != 2:
            raise InstanceFormatError("similarity must be a 2-d matrix")
        if np.any(self.similarity < 0):
            raise InstanceFormatError("similarities must be nonnegative")

    @property
    def n(self) -> int:
        return self.similarity.shape[0]

    def value(self, selection) -> float:
        ids = as_selection(selection)
        return float(self.value_csr(ids, np.array([0, ids.size], dtype=np.int64))[0])

    def value_csr(self, indices, indptr) -> np.ndarray:
        gathered = self.similarity[np.asarray(indices, dtype=np.int64)]
        best = _kernels.segment_max_rows(gathered, np.asarray(indptr, dtype=np.int64))
        return best.sum(axis=1)

    def shift(self, base):
        base = np.asarray(base, dtype=np.int64)
        col_max = (self.similarity[base].max(axis=0) if base.size
                   else np.zeros(self.similarity.shape[1]))
        derived = FacilityInstance(np.maximum(self.similarity - col_max, 0.0))
        return derived, float(col_max.sum())

    def restrict(self, keep):
        return FacilityInstance(self.similarity[np.asarray(keep, dtype=np.int64)])

    def to_dict(self) -> dict:
        return {
            "kind": "facility",
            "similarity": [[_encode_real(v) for v in row] for row in self.similarity],
        }


class AdditiveInstance:
    """Modular objective f(S) = sum of member weights."""

    kind = "additive"

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.ndim != 1:
            raise InstanceFormatError("additive weights must be a vector")
        if np.any(self.weights < 0):
            raise InstanceFormatError("additive weights must be nonnegative")

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def value(self, selection) -> float:
        ids = as_selection(selection)
        return float(self.weights[ids].sum())

    def value_csr(self, indices, indptr) -> np.ndarray:
        return _kernels.segment_sum(self.weights[np.asarray(indices, dtype=np.int64)],
                                    np.asarray(indptr, dtype=np.int64))

    def shift(self, base):
        base = np.asarray(base, dtype=np.int64)
        w = self.weights.copy()
        w[base] = 0.0
        return AdditiveInstance(w), float(self.weights[base].sum())

    def restrict(self, keep):
        return AdditiveInstance(self.weights[np.asarray(keep, dtype=np.int64)])

    def pair_marginal_batch(self, pool, t, count, gen):
        # Additive marginals do not depend on the co-drawn prefix, and the
        # marginal law of the probed element is uniform over the pool, so a
        # direct draw reproduces the pair-sampling distribution exactly.
        xs = pool[gen.integers(0, pool.size, size=count)]
        return self.weights[xs].copy()

    def to_dict(self) -> dict:
        return {
            "kind": "additive",
            "weights": [_encode_real(w) for w in self.weights],
        }


def coverage_value(inst: CoverageInstance, selection) -> float:
    """Weighted size of the union of the selected elements' point sets."""
    return inst.value(selection)


def facility_value(inst: FacilityInstance, selection) -> float:
    """Sum over clients of the best similarity to any selected element."""
    return inst.value(selection)


def additive_value(inst: AdditiveInstance, selection) -> float:
    return inst.value(selection)


# -- random instance generators ----------------------------------------------

def gen_coverage(rng: RandomSource, n: int, universe: int, avg_set_size: int,
                 weighted: bool = False) -> CoverageInstance:
    """Random coverage instance.

    Each element's point set is avg_set_size draws with replacement from the
    universe, deduplicated.  Weights are all 1 (integer-valued objective) or
    uniform on [0, 1] when `weighted`.
    """
    if n < 1 or universe < 1:
        raise ValueError("n and universe must be at least 1")
    gen = rng.generator
    sets = [np.unique(gen.integers(0, universe, size=avg_set_size))
            for _ in range(n)]
    weights = gen.random(universe) if weighted else np.ones(universe)
    return CoverageInstance(universe, weights, sets)


def gen_facility(rng: RandomSource, n: int, clients: int) -> FacilityInstance:
    """Random facility-location instance with uniform [0,1] similarities."""
    if n < 1 or clients < 1:
        raise ValueError("n and clients must be at least 1")
    return FacilityInstance(rng.generator.random((n, clients)))


def gen_additive(rng: RandomSource, n: int) -> AdditiveInstance:
    """Random additive instance with uniform [0,1] weights."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return AdditiveInstance(rng.generator.random(n))


# -- instance files -----------------------------------------------------------

def _encode_real(x: float):
    """Integers stay exact ints; other reals become shortest-roundtrip strings."""
    f = float(x)
    if f.is_integer() and abs(f) < 2**53:
        return int(f)
    return repr(f)


def _decode_real(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise InstanceFormatError(f"{where}: expected a number, got {v!r}")
    try:
        return float(v)
    except ValueError as exc:
        raise InstanceFormatError(f"{where}: bad numeric literal {v!r}") from exc


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise InstanceFormatError(f"{path}: missing field '{key}'")
    return doc[key]


def save_instance(inst, path) -> None:
    """Write an instance file (see `load_instance` for the schema)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(inst.to_dict(), fh, separators=(",", ":"), sort_keys=True)
        fh.write("\n")


def load_instance(path):
    """Load a `.inst.json` instance file, validating shape and ranges."""
    path = str(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(
                f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{path}: top level must be an object")
    kind = _require(doc, "kind", path)
    if kind == "coverage":
        universe = int(_require(doc, "universe_size", path))
        weights = [_decode_real(w, f"{path}: weights") for w in _require(doc, "weights", path)]
        sets = _require(doc, "sets", path)
        n = int(_require(doc, "n", path))
        if n != len(sets):
            raise InstanceFormatError(f"{path}: field 'n' ({n}) != number of sets ({len(sets)})")
        try:
            return CoverageInstance(universe, weights, sets)
        except InstanceFormatError as exc:
            raise InstanceFormatError(f"{path}: {exc}") from exc
    if kind == "facility":
        sim = [[_decode_real(v, f"{path}: similarity") for v in row]
               for row in _require(doc, "similarity", path)]
        return FacilityInstance(sim)
    if kind == "additive":
        weights = [_decode_real(w, f"{path}: weights") for w in _require(doc, "weights", path)]
        return AdditiveInstance(weights)
    raise InstanceFormatError(f"{path}: unknown instance kind {kind!r}")
