"""On-line prediction loops, side-information estimation and loss functionals.

A predictor is anything exposing ``scorer(alphabet, priming, continue_last)``
(the sequence measures and code-backed measures both do). Prediction given
earlier non-adjacent samples appends the growing word as a fresh boundary-
separated component, so the trace total telescopes to the conditional
probability of the whole word.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .alphabet import Alphabet, DataError, MultiSample, Sequence, as_multisample

LOG2_E = math.log2(math.e)


# ---------------------------------------------------------------------------
# Loss functionals
# ---------------------------------------------------------------------------

def kl_divergence(p, q) -> float:
    """sum p log2(p/q); +inf when q vanishes somewhere p does not."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DataError("distributions must share one alphabet")
    mask = p > 0
    if np.any(q[mask] == 0):
        return math.inf
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


def variation_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DataError("distributions must share one alphabet")
    return float(np.abs(p - q).sum())


def pinsker_check(p, q, slack: float = 1e-12) -> bool:
    """KL >= (log2 e)/2 * ||p - q||_1 ** 2 (always true; exposed as a check)."""
    kl = kl_divergence(p, q)
    if math.isinf(kl):
        return True
    return kl + slack >= (LOG2_E / 2.0) * variation_distance(p, q) ** 2


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

@dataclass
class PredictionStep:
    dist: np.ndarray
    symbol: int
    log2_loss: float


@dataclass
class PredictionTrace:
    alphabet: Alphabet
    steps: list[PredictionStep] = field(default_factory=list)
    next_dist: np.ndarray | None = None

    @property
    def total_log2_loss(self) -> float:
        return float(sum(s.log2_loss for s in self.steps))

    @property
    def cesaro_loss(self) -> float:
        return self.total_log2_loss / max(1, len(self.steps))

    def to_jsonl(self) -> str:
        lines = []
        for i, s in enumerate(self.steps):
            lines.append(json.dumps({
                "step": i + 1,
                "distribution": [float(v) for v in s.dist],
                "realized": self.alphabet.token(s.symbol),
                "log2_loss": s.log2_loss,
            }))
        return "\n".join(lines) + ("\n" if lines else "")

    def summary_csv(self) -> str:
        rows = ["step,realized,log2_loss,cumulative_log2_loss"]
        cum = 0.0
        for i, s in enumerate(self.steps):
            cum += s.log2_loss
            rows.append(f"{i + 1},{self.alphabet.token(s.symbol)},{s.log2_loss:.12g},{cum:.12g}")
        return "\n".join(rows) + "\n"


def online_predict(predictor, x: Sequence, priming: MultiSample | None = None) -> PredictionTrace:
    """Feed ``x`` one symbol at a time, recording each pre-symbol distribution.

    With ``priming`` the word grows as a new boundary-separated component, so
    the accumulated loss equals -log2 of the predictor's conditional
    probability of ``x`` given the priming samples.
    """
    scorer = predictor.scorer(x.alphabet, priming=priming, continue_last=False)
    trace = PredictionTrace(x.alphabet)
    for a in x.data:
        dist = scorer.cond_dist()
        step = scorer.push(int(a))
        trace.steps.append(PredictionStep(dist, int(a), -step))
    trace.next_dist = scorer.cond_dist()
    return trace


# ---------------------------------------------------------------------------
# Side information
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairSequence:
    """History of (x, y) pairs over a product alphabet X x Y."""

    x_alphabet: Alphabet
    y_alphabet: Alphabet
    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        for ix, iy in self.pairs:
            if not (0 <= ix < self.x_alphabet.size and 0 <= iy < self.y_alphabet.size):
                raise DataError("pair index out of range")

    def append(self, ix: int, iy: int) -> "PairSequence":
        return PairSequence(self.x_alphabet, self.y_alphabet, self.pairs + ((ix, iy),))

    def product_alphabet(self) -> Alphabet:
        toks = tuple(
            f"{sx}|{sy}" for sx in self.x_alphabet.symbols for sy in self.y_alphabet.symbols
        )
        return Alphabet(toks)

    def joint_index(self, ix: int, iy: int) -> int:
        return ix * self.y_alphabet.size + iy

    def joint_sequence(self) -> Sequence:
        data = np.array([self.joint_index(ix, iy) for ix, iy in self.pairs], dtype=np.int64)
        return Sequence(self.product_alphabet(), data)


def side_info_predict(predictor, history: PairSequence, y: int) -> np.ndarray:
    """Distribution over X given the pair history and the already-visible y.

    Computed as the joint extension probability normalized over the candidate
    x values at fixed y.
    """
    if not (0 <= y < history.y_alphabet.size):
        raise DataError("side-information symbol out of range")
    if history.x_alphabet.size == 1:
        return np.array([1.0])
    joint = history.joint_sequence()
    scorer = predictor.scorer(
        joint.alphabet, priming=as_multisample(joint), continue_last=True
    )
    dist = scorer.cond_dist()
    picks = np.array([dist[history.joint_index(ix, y)]
                      for ix in range(history.x_alphabet.size)])
    return picks / picks.sum()


# ---------------------------------------------------------------------------
# Average-loss curves against a known source
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CesaroPoint:
    t: int
    mean: float
    stderr: float
    runs: int


def cesaro_error_curve(source, predictor, checkpoints, runs: int,
                       seed: int | None = None) -> list[CesaroPoint]:
    """Monte-Carlo estimate of the time-averaged log-loss excess over the
    true source, (1/t) E[log2 p(x_1..t) / gamma(x_1..t)], at each checkpoint.
    """
    checkpoints = sorted(set(int(t) for t in checkpoints))
    if not checkpoints or checkpoints[0] < 1:
        raise DataError("checkpoints must be positive")
    t_max = checkpoints[-1]
    rng = np.random.default_rng(seed)
    vals = {t: [] for t in checkpoints}
    for _ in range(runs):
        x = source.sample(t_max, rng)
        for t in checkpoints:
            prefix = Sequence(x.alphabet, x.data[:t])
            excess = source.log2_prob(prefix) - predictor.log2(prefix)
            vals[t].append(excess / t)
    out = []
    for t in checkpoints:
        arr = np.asarray(vals[t])
        stderr = float(arr.std(ddof=1) / math.sqrt(runs)) if runs > 1 else 0.0
        out.append(CesaroPoint(t, float(arr.mean()), stderr, runs))
    return out


def cesaro_error_exact(source, predictor, t: int, alphabet: Alphabet) -> float:
    """Exhaustive evaluation of the same average by summing over all of A**t.

    Exponential in ``t``; the oracle counterpart of the Monte-Carlo estimate.
    """
    total = 0.0
    for word in itertools.product(range(alphabet.size), repeat=t):
        x = Sequence(alphabet, np.array(word, dtype=np.int64))
        lp = source.log2_prob(x)
        total += 2.0 ** lp * (lp - predictor.log2(x))
    return total / t
