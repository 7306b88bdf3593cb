"""Synthetic process generators, known-source models and CSV ingestion."""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .alphabet import Alphabet, DataError, Sequence

SINE_PERIOD = 46  # x_i = sin(pi*i/23) repeats every 46 steps

# f(i) = floor(amp * sin(pi*i/period + phase)); the classic four-function mix
DEFAULT_MIX_FUNCTIONS = (
    (5.0, 16.0, 0.0),
    (7.0, 5.0, math.pi / 5.0),
    (8.0, 3.0, 0.0),
    (8.0, 23.0, 0.0),
)


# ---------------------------------------------------------------------------
# Known sources (usable both as generators and as ground truth in loss tests)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BernoulliSource:
    """i.i.d. binary source with P(1) = p."""

    p: float
    alphabet: Alphabet = field(default_factory=Alphabet.binary)

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DataError("bernoulli parameter must lie strictly inside (0, 1)")

    def sample(self, n: int, rng: np.random.Generator) -> Sequence:
        data = (rng.random(n) < self.p).astype(np.int64)
        return Sequence(self.alphabet, data)

    def cond_dist(self, history=None) -> np.ndarray:
        return np.array([1.0 - self.p, self.p])

    def log2_prob(self, x: Sequence) -> float:
        ones = int(x.data.sum())
        return ones * math.log2(self.p) + (len(x) - ones) * math.log2(1.0 - self.p)

    def entropy_rate(self) -> float:
        return -(self.p * math.log2(self.p) + (1 - self.p) * math.log2(1 - self.p))


@dataclass(frozen=True)
class MarkovSource:
    """First-order chain over k states; rows of ``transition`` are P(next|state).

    The initial symbol is drawn from the stationary distribution, so the
    source is stationary from the first step.
    """

    transition: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        mat = np.asarray(self.transition, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DataError("transition matrix must be square")
        if np.any(mat <= 0) or not np.allclose(mat.sum(axis=1), 1.0, atol=1e-9):
            raise DataError("transition rows must be strictly positive and sum to 1")
        object.__setattr__(self, "_mat", mat)
        object.__setattr__(self, "_alphabet", Alphabet.of_size(mat.shape[0]))

    @property
    def alphabet(self) -> Alphabet:
        return self._alphabet

    def stationary(self) -> np.ndarray:
        mat = self._mat
        vals, vecs = np.linalg.eig(mat.T)
        k = int(np.argmin(np.abs(vals - 1.0)))
        pi = np.real(vecs[:, k])
        pi = np.abs(pi)
        return pi / pi.sum()

    def sample(self, n: int, rng: np.random.Generator) -> Sequence:
        k = self._mat.shape[0]
        out = np.empty(n, dtype=np.int64)
        if n == 0:
            return Sequence(self.alphabet, out)
        cum = [row.cumsum().tolist() for row in self._mat]
        u = rng.random(n).tolist()
        state = int(np.searchsorted(self.stationary().cumsum(), u[0]))
        state = min(state, k - 1)
        out[0] = state
        for i in range(1, n):
            state = min(bisect.bisect(cum[state], u[i]), k - 1)
            out[i] = state
        return Sequence(self.alphabet, out)

    def cond_dist(self, history: Sequence | None = None) -> np.ndarray:
        if history is None or len(history) == 0:
            return self.stationary()
        return self._mat[int(history.data[-1])].copy()

    def log2_prob(self, x: Sequence) -> float:
        if len(x) == 0:
            return 0.0
        pi = self.stationary()
        total = math.log2(pi[int(x.data[0])])
        for prev, nxt in zip(x.data[:-1], x.data[1:]):
            total += math.log2(self._mat[int(prev), int(nxt)])
        return total

    def entropy_rate(self) -> float:
        pi = self.stationary()
        mat = self._mat
        return float(-(pi[:, None] * mat * np.log2(mat)).sum())


# ---------------------------------------------------------------------------
# Real-valued generators
# ---------------------------------------------------------------------------

def sine_series(n: int, phase: int = 0) -> np.ndarray:
    """x_i = sin(pi*(i+phase)/23) for i = 1..n."""
    i = np.arange(1, n + 1, dtype=float)
    return np.sin(np.pi * (i + phase) / 23.0)


def four_mixture_series(n: int, rng: np.random.Generator, lam: float = 0.1,
                        functions=DEFAULT_MIX_FUNCTIONS,
                        segment_log: list | None = None) -> np.ndarray:
    """Concatenated segments of four integer-rounded sinusoids.

    Segment lengths are Poisson(lam)+1 (the bare Poisson would mostly give
    empty segments), the function of each segment is drawn uniformly, and the
    position index keeps running across segment boundaries.  ``segment_log``
    collects (function index, length) pairs when provided.
    """
    out = np.empty(n, dtype=float)
    i = 0
    while i < n:
        length = int(rng.poisson(lam)) + 1
        pick = int(rng.integers(0, len(functions)))
        amp, period, phase = functions[pick]
        if segment_log is not None:
            segment_log.append((pick, length))
        for j in range(i, min(i + length, n)):
            out[j] = math.floor(amp * math.sin(math.pi * (j + 1) / period + phase))
        i += length
    return out


# ---------------------------------------------------------------------------
# Process specification and dispatch
# ---------------------------------------------------------------------------

@dataclass
class ProcessSpec:
    """Named process with parameters; seeded runs are bit-reproducible.

    Kinds: ``sine`` (params: phase), ``four-mixture`` (lam, functions),
    ``bernoulli`` (p), ``markov`` (transition), ``constant`` (value),
    ``csv`` (path, column).
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None

    def describe(self) -> dict[str, Any]:
        safe = {k: v for k, v in self.params.items() if k != "_series"}
        return {"kind": self.kind, "params": safe, "seed": self.seed}


def generate(spec: ProcessSpec, n: int, rng: np.random.Generator | None = None):
    """Materialize ``n`` values: a float array for real-valued kinds, a
    :class:`Sequence` for symbolic ones."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    kind = spec.kind
    p = spec.params
    if kind == "sine":
        return sine_series(n, phase=int(p.get("phase", 0)))
    if kind == "four-mixture":
        return four_mixture_series(n, rng, lam=float(p.get("lam", 0.1)),
                                   functions=p.get("functions", DEFAULT_MIX_FUNCTIONS))
    if kind == "constant":
        return np.full(n, float(p.get("value", 1.0)))
    if kind == "bernoulli":
        return BernoulliSource(float(p.get("p", 0.5))).sample(n, rng)
    if kind == "markov":
        matrix = p.get("transition")
        if matrix is None:
            raise DataError("markov process needs a transition matrix")
        return MarkovSource(tuple(tuple(row) for row in matrix)).sample(n, rng)
    if kind == "csv":
        series = p.get("_series")
        if series is None:
            series = ingest_csv(p["path"], p.get("column"))
            p["_series"] = series
        if len(series) < n:
            raise DataError(f"csv series has {len(series)} values, need {n}")
        return series[:n].copy()
    raise DataError(f"unknown process kind: {kind!r}")


def ingest_csv(path: str, column=None) -> np.ndarray:
    """Read one numeric column; a non-numeric first row is treated as a header.

    ``column`` may be an integer position or a header name; default is the
    first column.  Parse failures report the offending line number.
    """
    rows: list[float] = []
    col_idx: int | None = None
    header: list[str] | None = None
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise DataError(f"cannot open {path}: {e}") from e
    with fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1:
                try:
                    float(_pick(row, column, None, lineno))
                except ValueError:
                    header = [c.strip() for c in row]
                    continue
                except DataError:
                    # named column requires a header row
                    header = [c.strip() for c in row]
                    continue
            if col_idx is None:
                col_idx = _resolve_column(column, header, lineno)
            cell = _pick(row, col_idx, header, lineno)
            try:
                rows.append(float(cell))
            except ValueError:
                raise DataError(f"{path}:{lineno}: not a number: {cell!r}") from None
    if not rows:
        raise DataError(f"{path}: no numeric data found")
    return np.asarray(rows, dtype=float)


def _resolve_column(column, header, lineno) -> int:
    if column is None:
        return 0
    if isinstance(column, int) or (isinstance(column, str) and column.lstrip("-").isdigit()):
        return int(column)
    if header is None or column not in header:
        raise DataError(f"column {column!r} not found"
                        + (f" in header {header}" if header else " (file has no header)"))
    return header.index(column)


def _pick(row, column, header, lineno):
    idx = column if isinstance(column, int) else _resolve_column(column, header, lineno)
    if idx >= len(row):
        raise DataError(f"line {lineno}: column {idx} missing (row has {len(row)} fields)")
    return row[idx].strip()
