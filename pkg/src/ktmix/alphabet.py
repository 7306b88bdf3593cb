"""Finite alphabets, symbol sequences and multi-sample word statistics.

A :class:`MultiSample` is an ordered collection of sequences produced by one
source but not adjacent in time (separate realizations, or one realization
with gaps).  All word statistics here are *within-sample*: an occurrence of a
word never spans the boundary between two samples, which is what makes the
pooled counts usable by the Markov measure machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence as PySequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed symbol data: unknown tokens, mixed alphabets, bad files."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbol tokens with a dense index mapping."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise DataError("alphabet needs at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise DataError(f"duplicate symbols in alphabet: {self.symbols}")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise DataError(f"token {token!r} not in alphabet {self.symbols}") from None

    def token(self, i: int) -> str:
        return self.symbols[i]

    @classmethod
    def binary(cls) -> "Alphabet":
        return cls(("0", "1"))

    @classmethod
    def of_size(cls, n: int) -> "Alphabet":
        """Alphabet of ``n`` numeric tokens "0".."n-1" (used for quantization cells)."""
        return cls(tuple(str(i) for i in range(n)))

    @classmethod
    def from_spec(cls, spec: str) -> "Alphabet":
        """Parse a CLI alphabet declaration.

        A comma in ``spec`` switches to token mode ("a,b,c"); otherwise each
        character is one symbol ("01" or "OI").
        """
        if "," in spec:
            toks = tuple(t for t in (p.strip() for p in spec.split(",")) if t)
        else:
            toks = tuple(spec)
        return cls(toks)


@dataclass(frozen=True, eq=False)
class Sequence:
    """Word over an :class:`Alphabet`, stored as dense symbol indices."""

    alphabet: Alphabet
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.int64)
        if arr.ndim != 1:
            raise DataError("sequence data must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= self.alphabet.size):
            raise DataError("symbol index out of range for alphabet")
        if arr.flags.writeable:
            # freeze a private copy; views of already-frozen arrays are shared
            arr = arr.copy()
            arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    def __len__(self) -> int:
        return int(self.data.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Sequence)
            and self.alphabet == other.alphabet
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self) -> int:
        return hash((self.alphabet.symbols, self.data.tobytes()))

    def tokens(self) -> tuple[str, ...]:
        return tuple(self.alphabet.token(int(i)) for i in self.data)

    def text(self) -> str:
        sep = "" if all(len(s) == 1 for s in self.alphabet.symbols) else ","
        return sep.join(self.tokens())

    def append(self, symbol: int) -> "Sequence":
        return Sequence(self.alphabet, np.append(self.data, np.int64(symbol)))

    @classmethod
    def from_tokens(cls, alphabet: Alphabet, tokens: Iterable[str]) -> "Sequence":
        return cls(alphabet, np.array([alphabet.index(t) for t in tokens], dtype=np.int64))

    @classmethod
    def from_text(cls, text: str, alphabet: Alphabet | None = None) -> "Sequence":
        """One symbol per character; alphabet inferred (sorted) when not given."""
        if alphabet is None:
            alphabet = Alphabet(tuple(sorted(set(text))))
        return cls.from_tokens(alphabet, text)

    @classmethod
    def empty(cls, alphabet: Alphabet) -> "Sequence":
        return cls(alphabet, np.empty(0, dtype=np.int64))


@dataclass(frozen=True)
class MultiSample:
    """Ordered non-overlapping samples over one shared alphabet."""

    samples: tuple[Sequence, ...]

    def __post_init__(self):
        if not self.samples:
            raise DataError("multi-sample needs at least one sample")
        first = self.samples[0].alphabet
        for s in self.samples[1:]:
            if s.alphabet != first:
                raise DataError("all samples must share one alphabet")

    @property
    def alphabet(self) -> Alphabet:
        return self.samples[0].alphabet

    @property
    def total_length(self) -> int:
        return sum(len(s) for s in self.samples)

    @property
    def max_length(self) -> int:
        return max(len(s) for s in self.samples)

    def lengths(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.samples)

    def append_to_last(self, symbol: int) -> "MultiSample":
        return MultiSample(self.samples[:-1] + (self.samples[-1].append(symbol),))

    def with_new_sample(self, seq: Sequence) -> "MultiSample":
        if seq.alphabet != self.alphabet:
            raise DataError("new sample must share the multi-sample alphabet")
        return MultiSample(self.samples + (seq,))


def diamond_concat(parts: PySequence[Sequence]) -> MultiSample:
    """Combine samples so that statistics never cross sample boundaries."""
    return MultiSample(tuple(parts))


def as_multisample(x: Sequence | MultiSample) -> MultiSample:
    return x if isinstance(x, MultiSample) else MultiSample((x,))


def count_occurrences(ms: Sequence | MultiSample, w: Sequence) -> int:
    """Number of (overlapping) occurrences of ``w`` strictly inside each sample."""
    ms = as_multisample(ms)
    if len(w) == 0:
        raise DataError("word must be nonempty")
    if w.alphabet != ms.alphabet:
        raise DataError("word alphabet does not match sample alphabet")
    total = 0
    target = w.data
    ell = len(w)
    for s in ms.samples:
        if len(s) < ell:
            continue
        windows = np.lib.stride_tricks.sliding_window_view(s.data, ell)
        total += int((windows == target).all(axis=1).sum())
    return total


@dataclass
class ContextCounts:
    """Pooled counts of symbol ``a`` following context ``v`` (|v| = order).

    ``table[v]`` is an integer vector of length ``|A|``; ``row_sums[v]`` its sum.
    """

    alphabet: Alphabet
    order: int
    table: dict[tuple[int, ...], np.ndarray] = field(default_factory=dict)

    @property
    def row_sums(self) -> dict[tuple[int, ...], int]:
        return {v: int(c.sum()) for v, c in self.table.items()}

    def count(self, context: tuple[int, ...], symbol: int) -> int:
        row = self.table.get(tuple(context))
        return 0 if row is None else int(row[symbol])

    def total(self) -> int:
        return sum(int(c.sum()) for c in self.table.values())


def _gram_codes(ms: MultiSample, order: int) -> np.ndarray | None:
    """Integer codes of all (order+1)-grams inside the samples, or None when
    the base-|A| encoding would overflow int64."""
    A = ms.alphabet.size
    if (order + 1) * math.log2(A) > 62:
        return None
    chunks = []
    for s in ms.samples:
        n = len(s)
        if n < order + 1:
            continue
        codes = np.zeros(n - order, dtype=np.int64)
        for j in range(order + 1):
            codes = codes * A + s.data[j : n - order + j]
        chunks.append(codes)
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(chunks)


def gram_count_matrix(ms: Sequence | MultiSample, order: int) -> np.ndarray:
    """Per-context symbol-count rows (contexts that occur, in code order)."""
    ms = as_multisample(ms)
    A = ms.alphabet.size
    codes = _gram_codes(ms, order)
    if codes is None:
        table = context_counts(ms, order).table
        if not table:
            return np.zeros((0, A), dtype=np.int64)
        return np.stack(list(table.values()))
    if codes.size == 0:
        return np.zeros((0, A), dtype=np.int64)
    uniq, cnt = np.unique(codes, return_counts=True)
    ctx_codes = uniq // A
    symbols = uniq % A
    _, rows = np.unique(ctx_codes, return_inverse=True)
    mat = np.zeros((rows.max() + 1, A), dtype=np.int64)
    mat[rows, symbols] = cnt
    return mat


def context_counts(ms: Sequence | MultiSample, order: int) -> ContextCounts:
    """Count (order+1)-grams inside each sample; contexts never cross boundaries."""
    ms = as_multisample(ms)
    if order < 0:
        raise DataError("order must be >= 0")
    counts = ContextCounts(ms.alphabet, order)
    codes = _gram_codes(ms, order)
    if codes is None:
        _count_tuples(ms, order, counts)
    else:
        _count_coded(ms, order, codes, counts)
    return counts


def _count_coded(ms: MultiSample, m: int, codes: np.ndarray, out: ContextCounts):
    A = ms.alphabet.size
    if codes.size == 0:
        return
    uniq, cnt = np.unique(codes, return_counts=True)
    for code, c in zip(uniq, cnt):
        ctx_code, a = divmod(int(code), A)
        ctx = _decode(ctx_code, m, A)
        row = out.table.get(ctx)
        if row is None:
            row = np.zeros(A, dtype=np.int64)
            out.table[ctx] = row
        row[a] = c


def _decode(code: int, m: int, A: int) -> tuple[int, ...]:
    out = []
    for _ in range(m):
        code, r = divmod(code, A)
        out.append(r)
    return tuple(reversed(out))


def _count_tuples(ms: MultiSample, m: int, out: ContextCounts):
    A = ms.alphabet.size
    for s in ms.samples:
        data = s.data
        for i in range(m, len(s)):
            ctx = tuple(int(x) for x in data[i - m : i])
            row = out.table.get(ctx)
            if row is None:
                row = np.zeros(A, dtype=np.int64)
                out.table[ctx] = row
            row[int(data[i])] += 1
