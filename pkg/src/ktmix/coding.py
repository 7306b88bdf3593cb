"""Bridge between codes and measures.

Any uniquely decodable code induces a sub-probability measure through
2**(-length); conversely any measure yields a code of length close to
-log2(probability).  This module provides the built-in code derived from the
order mixture, an adapter that turns an external compression program into a
code-length oracle, Kraft verification, and the two normalization routes from
lengths back to measures (exact enumeration, and per-symbol conditional).
"""

from __future__ import annotations

import itertools
import math
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .alphabet import Alphabet, DataError, Sequence
from .logprob import exp2, log2_sum
from .measures import KTMixture


class CompressorError(RuntimeError):
    """External compressor failed: missing binary, nonzero exit, bad output."""


class Compressor:
    """Deterministic total mapping from finite sequences to a bit length."""

    def code_length(self, x: Sequence) -> int:
        raise NotImplementedError


class BuiltinCode(Compressor):
    """Idealized code for a sequence measure.

    Length is ceil(-log2 mu(x)) plus a constant overhead representing coder
    termination (default 1 bit).  The overhead guarantees Kraft's inequality
    with room to spare: 2**-length <= mu(x) / 2.
    """

    def __init__(self, measure=None, overhead_bits: int = 1):
        if overhead_bits < 1:
            raise ValueError("overhead must be at least 1 bit for the Kraft margin")
        self.measure = measure if measure is not None else KTMixture()
        self.overhead_bits = overhead_bits

    def code_length(self, x: Sequence) -> int:
        v = -self.measure.log2(x)
        # tiny slack so exact powers of two are not pushed up a bit by float fuzz
        return max(1, math.ceil(v - 1e-9) + self.overhead_bits)


class ExternalCompressor(Compressor):
    """Run an external compression command and measure its output size.

    Two invocation styles:

    * stream mode (default): the command reads raw bytes on stdin and writes
      the compressed stream to stdout, e.g. ``gzip -n -c``;
    * file mode: the command contains ``{in}`` (and optionally ``{out}``)
      placeholders substituted with temporary file paths.

    Symbols are mapped to single bytes via their alphabet index, so only
    alphabets up to 256 symbols are supported.  Code length is 8 times the
    compressed byte count; container headers are counted (an additive
    constant, dominant for short inputs, irrelevant per symbol as t grows).
    Lengths are memoized; the cache lock makes concurrent calls safe.
    """

    def __init__(self, command: str, timeout: float = 120.0):
        if not command.strip():
            raise DataError("empty compressor command")
        self.command = command
        self.timeout = timeout
        self._cache: dict[bytes, int] = {}
        self._lock = threading.Lock()

    def code_length(self, x: Sequence) -> int:
        data = self._to_bytes(x)
        with self._lock:
            hit = self._cache.get(data)
        if hit is not None:
            return hit
        out = self._run(data)
        bits = max(1, 8 * len(out))
        with self._lock:
            self._cache[data] = bits
        return bits

    @staticmethod
    def _to_bytes(x: Sequence) -> bytes:
        if x.alphabet.size > 256:
            raise DataError("external compressors support alphabets up to 256 symbols")
        return bytes(bytearray(int(v) for v in x.data))

    def _run(self, data: bytes) -> bytes:
        if "{in}" in self.command:
            return self._run_files(data)
        argv = shlex.split(self.command)
        try:
            proc = subprocess.run(
                argv, input=data, capture_output=True, timeout=self.timeout
            )
        except FileNotFoundError as e:
            raise CompressorError(f"compressor not found: {argv[0]}") from e
        except subprocess.TimeoutExpired as e:
            raise CompressorError(f"compressor timed out: {self.command}") from e
        if proc.returncode != 0:
            err = proc.stderr.decode(errors="replace")[-500:]
            raise CompressorError(
                f"compressor exited with {proc.returncode}: {self.command}\n{err}"
            )
        return proc.stdout

    def _run_files(self, data: bytes) -> bytes:
        with tempfile.TemporaryDirectory(prefix="ktmix-") as tmp:
            in_path = Path(tmp) / "input.bin"
            out_path = Path(tmp) / "output.bin"
            in_path.write_bytes(data)
            cmd = self.command.replace("{in}", str(in_path)).replace("{out}", str(out_path))
            argv = shlex.split(cmd)
            try:
                proc = subprocess.run(argv, capture_output=True, timeout=self.timeout)
            except FileNotFoundError as e:
                raise CompressorError(f"compressor not found: {argv[0]}") from e
            except subprocess.TimeoutExpired as e:
                raise CompressorError(f"compressor timed out: {self.command}") from e
            if proc.returncode != 0:
                err = proc.stderr.decode(errors="replace")[-500:]
                raise CompressorError(
                    f"compressor exited with {proc.returncode}: {self.command}\n{err}"
                )
            if "{out}" in self.command:
                if not out_path.exists():
                    raise CompressorError("compressor produced no {out} file")
                return out_path.read_bytes()
            return proc.stdout


def code_length(compressor: Compressor, x: Sequence) -> int:
    return compressor.code_length(x)


def builtin_code_length(x: Sequence, measure=None, overhead_bits: int = 1) -> int:
    return BuiltinCode(measure, overhead_bits).code_length(x)


def measure_from_code(compressor: Compressor, x: Sequence,
                      enumeration_cap: int = 1 << 20) -> float:
    """Exactly normalized log2 measure of ``x``: weight 2**-length divided by
    the total weight of all words of the same length.

    Normalization enumerates the whole of A**n, so this is a desk-scale
    verification tool; use :func:`conditional_from_code` beyond the cap.
    """
    alphabet = x.alphabet
    n = len(x)
    if alphabet.size ** n > enumeration_cap:
        raise DataError(
            f"normalizing over {alphabet.size}**{n} words exceeds the cap "
            f"({enumeration_cap}); use conditional_from_code instead"
        )
    target = -float(compressor.code_length(x))
    terms = []
    for word in itertools.product(range(alphabet.size), repeat=n):
        w = Sequence(alphabet, np.array(word, dtype=np.int64))
        terms.append(-float(compressor.code_length(w)))
    return target - log2_sum(terms)


def conditional_from_code(compressor: Compressor, context: Sequence,
                          alphabet: Alphabet | None = None) -> np.ndarray:
    """Next-symbol distribution from code-length differences.

    Weights 2**-|U(context.a)| normalized over the alphabet.  This is the
    practical surrogate for the exactly normalized measure; it is always a
    valid distribution but is not guaranteed to inherit that measure's
    asymptotic optimality.
    """
    alphabet = alphabet or context.alphabet
    lens = np.array(
        [compressor.code_length(context.append(a)) for a in range(alphabet.size)],
        dtype=float,
    )
    w = np.exp2(-(lens - lens.min()))
    return w / w.sum()


@dataclass(frozen=True)
class KraftResult:
    holds: bool
    total: float


def kraft_check(lengths, alphabet: Alphabet, n: int, slack: float = 1e-12) -> KraftResult:
    """Verify sum of 2**-bits <= 1 over a complete enumeration of A**n.

    ``lengths`` is an iterable of (word, bits) pairs.  Note that Kraft holding
    is necessary, not sufficient, for unique decodability.
    """
    seen = {}
    for word, bits in lengths:
        if len(word) != n or word.alphabet != alphabet:
            raise DataError("kraft_check: every word must lie in A**n")
        key = word.data.tobytes()
        if key in seen:
            raise DataError("kraft_check: duplicate word in enumeration")
        seen[key] = bits
    if len(seen) != alphabet.size ** n:
        raise DataError(
            f"kraft_check: incomplete enumeration ({len(seen)} of {alphabet.size ** n})"
        )
    total = float(sum(2.0 ** -b for b in seen.values()))
    return KraftResult(total <= 1.0 + slack, total)


@dataclass
class CodeMeasure:
    """Measure-like handle backed by a compressor.

    ``mode="exact"`` normalizes over A**n by enumeration (cap-limited);
    ``mode="conditional"`` only ever normalizes one-symbol extensions, which
    is the only practical option for real compressors.
    """

    compressor: Compressor
    mode: str = "conditional"
    enumeration_cap: int = 1 << 20

    @staticmethod
    def _plain(x) -> Sequence:
        if isinstance(x, Sequence):
            return x
        if len(x.samples) == 1:
            return x.samples[0]
        raise DataError("code-based measures are defined on single samples")

    def log2(self, x) -> float:
        x = self._plain(x)
        if self.mode == "exact":
            return measure_from_code(self.compressor, x, self.enumeration_cap)
        return -float(self.compressor.code_length(x))

    def prob(self, x) -> float:
        return exp2(self.log2(x))

    def cond_dist(self, x) -> np.ndarray:
        return conditional_from_code(self.compressor, self._plain(x))

    def scorer(self, alphabet: Alphabet, priming=None, continue_last: bool = False):
        return CodeScorer(self.compressor, alphabet, priming, continue_last)


class CodeScorer:
    """Stepwise conditional-from-code predictor over a growing sequence.

    Code-based measures are only defined on plain sequences, so priming must
    be a single sample continued by the growing word.
    """

    def __init__(self, compressor: Compressor, alphabet: Alphabet,
                 priming=None, continue_last: bool = False):
        self.compressor = compressor
        self.alphabet = alphabet
        self._data: list[int] = []
        if priming is not None:
            samples = priming.samples if hasattr(priming, "samples") else (priming,)
            if len(samples) != 1 or not continue_last:
                raise DataError(
                    "code-based predictors accept only single-sample priming "
                    "continued by the growing word"
                )
            self._data = [int(v) for v in samples[0].data]
        self.log2_total = 0.0

    def _context(self) -> Sequence:
        return Sequence(self.alphabet, np.array(self._data, dtype=np.int64))

    def cond_dist(self) -> np.ndarray:
        return conditional_from_code(self.compressor, self._context(), self.alphabet)

    def cond(self, a: int) -> float:
        return float(self.cond_dist()[a])

    def push(self, a: int) -> float:
        step = math.log2(self.cond(a))
        self._data.append(a)
        self.log2_total += step
        return step
