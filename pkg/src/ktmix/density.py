"""Quantized density estimation for real-valued series.

A dyadic partition refines an interval into 2**k equal half-open cells per
level.  Quantizing a series at level k turns it into a word over a 2**k-cell
alphabet; any sequence measure over that alphabet then induces a piecewise
constant density (measure of the quantized word divided by cell volume).
Mixing levels with the slowly decaying weight sequence gives an estimator
that is consistent without knowing the right resolution in advance.

Levels run 1..S with weight 1 at the coarsest nontrivial (two-cell)
partition; the weight beyond the finite cap S is renormalized across the
included levels so the estimator integrates to exactly one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .alphabet import Alphabet, DataError, Sequence
from .logprob import exp2, log2_sum
from .measures import KTMixture, mixture_weight


@lru_cache(maxsize=32)
def _cell_alphabet(n: int) -> Alphabet:
    return Alphabet.of_size(n)


@dataclass(frozen=True)
class DyadicPartition:
    """Half-open interval [lo, hi) split into 2**k equal cells at level k."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise DataError("partition needs finite lo < hi")

    @property
    def span(self) -> float:
        return self.hi - self.lo

    def cells(self, level: int) -> int:
        return 1 << level

    def width(self, level: int) -> float:
        return self.span / self.cells(level)

    def alphabet(self, level: int) -> Alphabet:
        return _cell_alphabet(self.cells(level))

    def midpoints(self, level: int) -> np.ndarray:
        k = self.cells(level)
        return self.lo + (np.arange(k) + 0.5) * self.width(level)

    def quantize(self, x: float, level: int, clamp: bool = False) -> int:
        return int(self.quantize_array(np.array([x]), level, clamp)[0])

    def quantize_array(self, xs, level: int, clamp: bool = False) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if clamp:
            xs = np.clip(xs, self.lo, np.nextafter(self.hi, self.lo))
        else:
            bad = (xs < self.lo) | (xs > self.hi)
            if bad.any():
                raise DataError(
                    f"value {xs[bad][0]!r} outside [{self.lo}, {self.hi}] "
                    "(pass clamp=True to clip)"
                )
        k = self.cells(level)
        idx = np.floor((xs - self.lo) / self.width(level)).astype(np.int64)
        # the right endpoint maps into the last cell
        return np.clip(idx, 0, k - 1)

    def sequence(self, xs, level: int, clamp: bool = False) -> Sequence:
        return Sequence(self.alphabet(level), self.quantize_array(xs, level, clamp))


@dataclass(frozen=True)
class QuantizedSequence:
    """Cell indices of a series at one level; coarsening drops low bits."""

    partition: DyadicPartition
    level: int
    indices: np.ndarray

    @classmethod
    def from_values(cls, partition: DyadicPartition, xs, level: int,
                    clamp: bool = False) -> "QuantizedSequence":
        return cls(partition, level, partition.quantize_array(xs, level, clamp))

    def coarsen(self, level: int) -> "QuantizedSequence":
        if level > self.level:
            raise DataError("can only coarsen to a lower level")
        return QuantizedSequence(self.partition, level,
                                 self.indices >> (self.level - level))

    def sequence(self) -> Sequence:
        return Sequence(self.partition.alphabet(self.level), self.indices)


def quantized_density_level(xs, level: int, partition: DyadicPartition,
                            measure=None, clamp: bool = False) -> float:
    """Density of the series through one quantization level:
    measure(quantized word) / product of cell volumes."""
    measure = measure if measure is not None else KTMixture()
    seq = partition.sequence(xs, level, clamp)
    t = len(seq)
    return exp2(measure.log2(seq) - t * math.log2(partition.width(level)))


class MixtureDensity:
    """Level-mixture density estimator with mean prediction.

    Each level contributes (level measure of the quantized word) / volume,
    weighted by the renormalized weight sequence.  The default level measure
    is the order mixture capped at ``max_order``; a code-backed measure can
    be substituted via ``measure_factory`` (conditional-only normalization
    then applies to its predictions).
    """

    def __init__(self, partition: DyadicPartition, levels: int = 8,
                 max_order: int | None = 8, measure_factory=None,
                 clamp: bool = False):
        if levels < 1:
            raise DataError("need at least one quantization level")
        self.partition = partition
        self.levels = levels
        self.clamp = clamp
        if measure_factory is None:
            measure_factory = lambda level: KTMixture(max_order=max_order)
        self.measures = {s: measure_factory(s) for s in range(1, levels + 1)}
        raw = np.array([mixture_weight(s) for s in range(1, levels + 1)])
        self.level_log2_weights = np.log2(raw / raw.sum())

    # -- joint density ------------------------------------------------------

    def _level_log2(self, xs, s: int) -> float:
        seq = self.partition.sequence(xs, s, self.clamp)
        vol = len(seq) * math.log2(self.partition.width(s))
        return self.measures[s].log2(seq) - vol

    def level_terms(self, xs) -> np.ndarray:
        """Per-level log2 of weight * measure / volume."""
        return np.array([
            self.level_log2_weights[s - 1] + self._level_log2(xs, s)
            for s in range(1, self.levels + 1)
        ])

    def log2_density(self, xs) -> float:
        return log2_sum(self.level_terms(xs))

    def density(self, xs) -> float:
        return exp2(self.log2_density(xs))

    def level_posterior(self, xs) -> np.ndarray:
        terms = self.level_terms(xs)
        return np.exp2(terms - log2_sum(terms))

    # -- conditionals -------------------------------------------------------

    def cond_log2_density(self, history, x: float) -> float:
        joint = np.append(np.asarray(history, dtype=float), x)
        return self.log2_density(joint) - self.log2_density(history)

    def cond_density(self, history, x: float) -> float:
        return exp2(self.cond_log2_density(history, x))

    def _level_cond_dists(self, history):
        """Next-cell distribution at every level given the history."""
        dists = {}
        for s in range(1, self.levels + 1):
            seq = self.partition.sequence(history, s, self.clamp)
            dists[s] = self.measures[s].cond_dist(seq)
        return dists

    def predict_mean(self, history) -> float:
        """Exact integral of x against the conditional density.

        The density is piecewise constant, so the integral is the
        level-posterior-weighted sum of conditional cell probabilities times
        cell midpoints.
        """
        history = np.asarray(history, dtype=float)
        beta = self.level_posterior(history)
        dists = self._level_cond_dists(history)
        value = 0.0
        for s in range(1, self.levels + 1):
            value += beta[s - 1] * float(dists[s] @ self.partition.midpoints(s))
        return value

    def interval_prob(self, history, cells) -> float:
        """Conditional probability that the next value falls in a union of
        finest-level cells."""
        cells = np.asarray(cells, dtype=np.int64)
        if cells.size == 0:
            return 0.0
        top = self.cells_at_top()
        if cells.min() < 0 or cells.max() >= top:
            raise DataError("cell index outside the finest partition")
        if np.unique(cells).size != cells.size:
            raise DataError("duplicate cells in interval")
        history = np.asarray(history, dtype=float)
        beta = self.level_posterior(history)
        dists = self._level_cond_dists(history)
        total = 0.0
        for s in range(1, self.levels + 1):
            ancestors = cells >> (self.levels - s)
            frac = 2.0 ** (s - self.levels)   # each finest cell is this share of its ancestor
            total += beta[s - 1] * float(dists[s][ancestors].sum() * frac)
        return total

    def cells_at_top(self) -> int:
        return self.partition.cells(self.levels)

    def cells_from_interval(self, a: float, b: float) -> np.ndarray:
        """Finest-level cell indices for [a, b); endpoints must sit on the grid."""
        w = self.partition.width(self.levels)
        ia = (a - self.partition.lo) / w
        ib = (b - self.partition.lo) / w
        tol = 1e-9
        if abs(ia - round(ia)) > tol or abs(ib - round(ib)) > tol:
            raise DataError("interval endpoints are not aligned to the finest cells")
        ia, ib = int(round(ia)), int(round(ib))
        if not 0 <= ia <= ib <= self.cells_at_top():
            raise DataError("interval outside the partition")
        return np.arange(ia, ib, dtype=np.int64)
