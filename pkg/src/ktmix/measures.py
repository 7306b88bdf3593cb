"""Sequence measures: add-one (Laplace) and add-half (Krichevsky-Trofimov)
estimators of fixed Markov order, and their weighted mixture over all orders.

Every measure assigns a strictly positive probability to every finite word
and satisfies additivity: sum_a mu(x.a) = mu(x).  Evaluation is exact in the
log2 domain via log-Gamma; linear probabilities appear only in conditionals.

The order mixture combines add-half measures K_m of every order m with a
slowly decaying weight sequence.  Orders at or above the longest sample
length all coincide with the uniform measure, so the infinite mixture
collapses to a finite sum plus a closed-form tail and is evaluated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .alphabet import (
    Alphabet,
    DataError,
    MultiSample,
    Sequence,
    as_multisample,
    context_counts,
    gram_count_matrix,
)
from .logprob import exp2, log2_sum

_LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# Order weights: a probability distribution on {1, 2, ...} whose tail sums
# have the closed form 1/log2(i+1), so infinite mixtures can be cut exactly.
# ---------------------------------------------------------------------------

def mixture_weight(i: int) -> float:
    """Weight of index i >= 1; w_1 = 1 - 1/log2(3), w_i = 1/log2(i+1) - 1/log2(i+2)."""
    if i < 1:
        raise ValueError("weight index starts at 1")
    if i == 1:
        return 1.0 - 1.0 / math.log2(3.0)
    return 1.0 / math.log2(i + 1) - 1.0 / math.log2(i + 2)


def mixture_weight_tail(i: int) -> float:
    """Sum of weights from index i on: 1 for i=1, else 1/log2(i+1)."""
    if i < 1:
        raise ValueError("weight index starts at 1")
    if i == 1:
        return 1.0
    return 1.0 / math.log2(i + 1)


@dataclass(frozen=True)
class WeightSequence:
    """Strictly positive weights on {1, 2, ...} summing to one.

    ``tail(i)`` must equal the sum of ``weight(j)`` for j >= i in closed
    form; the mixture relies on it to cut the infinite sum exactly.  Any
    such sequence works; the default decays like 1/log^2.
    """

    weight: object
    tail: object

    def log2_weight(self, i: int) -> float:
        return math.log2(self.weight(i))

    def log2_tail(self, i: int) -> float:
        return math.log2(self.tail(i))


LOG_WEIGHTS = WeightSequence(mixture_weight, mixture_weight_tail)


# ---------------------------------------------------------------------------
# Batch evaluation of add-beta measures from pooled gram counts
# ---------------------------------------------------------------------------

def _add_beta_log2(ms: MultiSample, order: int, beta: float) -> float:
    """log2 probability of the multi-sample under the order-m add-beta measure.

    The first min(order, len(sample)) letters of each sample are uniform;
    the rest follow per-context add-beta conditionals with counts pooled
    across samples (grams never cross sample boundaries).
    """
    A = ms.alphabet.size
    log2A = math.log2(A)
    uniform = -log2A * sum(min(order, t) for t in ms.lengths())
    mat = gram_count_matrix(ms, order)
    if mat.size == 0:
        return uniform
    cells = mat[mat > 0].astype(float)
    rows = mat.sum(axis=1).astype(float)
    block = (
        gammaln(cells + beta).sum()
        - cells.size * gammaln(beta)
        - gammaln(rows + A * beta).sum()
        + rows.size * gammaln(A * beta)
    ) / _LN2
    return uniform + block


def _cond_dist_from_counts(ms: MultiSample, order: int, beta: float) -> np.ndarray:
    """Next-symbol distribution for the final sample under the add-beta rule."""
    final = ms.samples[-1]
    A = ms.alphabet.size
    if len(final) < order:
        return np.full(A, 1.0 / A)
    ctx = tuple(int(v) for v in final.data[len(final) - order :])
    row = context_counts(ms, order).table.get(ctx)
    if row is None:
        row = np.zeros(A, dtype=np.int64)
    return (row + beta) / (row.sum() + A * beta)


# ---------------------------------------------------------------------------
# Incremental per-order state shared by the sequential scorers
# ---------------------------------------------------------------------------

class _OrderState:
    """Pooled gram counts of one order, updatable as the final sample grows."""

    __slots__ = ("order", "beta", "A", "rows", "sums")

    def __init__(self, order: int, beta: float, A: int):
        self.order = order
        self.beta = beta
        self.A = A
        self.rows: dict[tuple[int, ...], np.ndarray] = {}
        self.sums: dict[tuple[int, ...], int] = {}

    def load(self, ms: MultiSample):
        for ctx, row in context_counts(ms, self.order).table.items():
            self.rows[ctx] = row.astype(np.int64).copy()
            self.sums[ctx] = int(row.sum())

    def _ctx(self, final: list[int]) -> tuple[int, ...]:
        m = self.order
        return tuple(final[len(final) - m :]) if m else ()

    def cond_vec(self, final: list[int]) -> np.ndarray:
        if len(final) < self.order:
            return np.full(self.A, 1.0 / self.A)
        row = self.rows.get(self._ctx(final))
        if row is None:
            return np.full(self.A, 1.0 / self.A)
        return (row + self.beta) / (self.sums[self._ctx(final)] + self.A * self.beta)

    def cond(self, final: list[int], a: int) -> float:
        if len(final) < self.order:
            return 1.0 / self.A
        ctx = self._ctx(final)
        row = self.rows.get(ctx)
        if row is None:
            return self.beta / (self.A * self.beta)
        return (row[a] + self.beta) / (self.sums[ctx] + self.A * self.beta)

    def add(self, final: list[int], a: int):
        """Record the gram formed by appending ``a``; no-op in the uniform phase."""
        if len(final) < self.order:
            return
        ctx = self._ctx(final)
        row = self.rows.get(ctx)
        if row is None:
            row = np.zeros(self.A, dtype=np.int64)
            self.rows[ctx] = row
            self.sums[ctx] = 0
        row[a] += 1
        self.sums[ctx] += 1


class FixedOrderScorer:
    """On-line conditionals of one add-beta measure for a growing sample.

    ``priming`` seeds the pooled counts; with ``continue_last`` the growing
    word extends the last priming sample, otherwise it starts a fresh
    boundary-separated component.
    """

    def __init__(self, alphabet: Alphabet, order: int, beta: float,
                 priming: MultiSample | None = None, continue_last: bool = False):
        self.alphabet = alphabet
        self.order = order
        self.state = _OrderState(order, beta, alphabet.size)
        self._final: list[int] = []
        if priming is not None:
            if priming.alphabet != alphabet:
                raise DataError("priming alphabet mismatch")
            self.state.load(priming)
            if continue_last:
                self._final = [int(v) for v in priming.samples[-1].data]
        self.log2_total = 0.0

    def cond_dist(self) -> np.ndarray:
        return self.state.cond_vec(self._final)

    def cond(self, a: int) -> float:
        return self.state.cond(self._final, a)

    def push(self, a: int) -> float:
        p = self.state.cond(self._final, a)
        self.state.add(self._final, a)
        self._final.append(a)
        step = math.log2(p)
        self.log2_total += step
        return step


class MixtureScorer:
    """On-line conditionals of the order mixture for a growing sample.

    Keeps one :class:`_OrderState` per active order plus the closed-form
    uniform tail, so each appended symbol costs O(active orders).  Orders are
    instantiated lazily as the longest sample grows; ``max_order`` caps them
    (the capped remainder is treated as uniform and flagged via ``exact``).
    """

    def __init__(self, alphabet: Alphabet, priming: MultiSample | None = None,
                 continue_last: bool = False, max_order: int | None = None,
                 weights: WeightSequence = LOG_WEIGHTS):
        self.alphabet = alphabet
        self.A = alphabet.size
        self._log2A = math.log2(self.A)
        self.cap = max_order
        self.weights = weights
        self._final: list[int] = []
        self.t = 0
        self.maxlen = 0
        self.states: list[_OrderState] = []
        self.log2k: list[float] = []
        if priming is not None:
            if priming.alphabet != alphabet:
                raise DataError("priming alphabet mismatch")
            self.t = priming.total_length
            self.maxlen = priming.max_length
            n_orders = self.maxlen if self.cap is None else min(self.maxlen, self.cap)
            for m in range(n_orders):
                st = _OrderState(m, 0.5, self.A)
                st.load(priming)
                self.states.append(st)
                self.log2k.append(_add_beta_log2(priming, m, 0.5))
            if continue_last:
                self._final = [int(v) for v in priming.samples[-1].data]
        self.log2_uniform = -self._log2A * self.t
        self.log2_total = 0.0

    @property
    def exact(self) -> bool:
        return self.cap is None or self.maxlen <= self.cap

    def _terms(self) -> np.ndarray:
        terms = [self.weights.log2_weight(m + 1) + self.log2k[m]
                 for m in range(len(self.states))]
        terms.append(self.weights.log2_tail(len(self.states) + 1) + self.log2_uniform)
        return np.array(terms)

    def log2_mixture(self) -> float:
        return log2_sum(self._terms())

    def cond_dist(self) -> np.ndarray:
        terms = self._terms()
        w = np.exp2(terms - log2_sum(terms))
        dist = np.full(self.A, w[-1] / self.A)
        for m, st in enumerate(self.states):
            dist += w[m] * st.cond_vec(self._final)
        return dist

    def cond(self, a: int) -> float:
        terms = self._terms()
        w = np.exp2(terms - log2_sum(terms))
        p = w[-1] / self.A
        for m, st in enumerate(self.states):
            p += w[m] * st.cond(self._final, a)
        return float(p)

    def push(self, a: int) -> float:
        p = self.cond(a)
        for m, st in enumerate(self.states):
            self.log2k[m] += math.log2(st.cond(self._final, a))
            st.add(self._final, a)
        self.log2_uniform -= self._log2A
        self.t += 1
        self._final.append(a)
        if len(self._final) > self.maxlen:
            self.maxlen = len(self._final)
            if self.cap is None or len(self.states) < self.cap:
                # New top order: its only gram is the whole final sample, and
                # its value currently equals the uniform measure.
                m = len(self.states)
                st = _OrderState(m, 0.5, self.A)
                st.add(self._final[:m], self._final[m])
                self.states.append(st)
                self.log2k.append(self.log2_uniform)
        step = math.log2(p)
        self.log2_total += step
        return step


# ---------------------------------------------------------------------------
# Measure handles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Laplace:
    """Add-one estimator of fixed Markov order."""

    order: int = 0

    def log2(self, x: Sequence | MultiSample) -> float:
        return _add_beta_log2(as_multisample(x), self.order, 1.0)

    def prob(self, x) -> float:
        return exp2(self.log2(x))

    def cond(self, x, a: int) -> float:
        return float(self.cond_dist(x)[a])

    def cond_dist(self, x) -> np.ndarray:
        return _cond_dist_from_counts(as_multisample(x), self.order, 1.0)

    def scorer(self, alphabet: Alphabet, priming=None, continue_last=False) -> FixedOrderScorer:
        return FixedOrderScorer(alphabet, self.order, 1.0, priming, continue_last)


@dataclass(frozen=True)
class Krichevsky:
    """Add-half estimator of fixed Markov order (minimax for i.i.d. sources)."""

    order: int = 0

    def log2(self, x: Sequence | MultiSample) -> float:
        return _add_beta_log2(as_multisample(x), self.order, 0.5)

    def prob(self, x) -> float:
        return exp2(self.log2(x))

    def cond(self, x, a: int) -> float:
        return float(self.cond_dist(x)[a])

    def cond_dist(self, x) -> np.ndarray:
        return _cond_dist_from_counts(as_multisample(x), self.order, 0.5)

    def scorer(self, alphabet: Alphabet, priming=None, continue_last=False) -> FixedOrderScorer:
        return FixedOrderScorer(alphabet, self.order, 0.5, priming, continue_last)


@dataclass(frozen=True)
class KTMixture:
    """Weighted mixture of add-half measures over all Markov orders.

    ``max_order=None`` evaluates the infinite mixture exactly (orders at or
    above the longest sample coincide with the uniform measure and are
    absorbed into a closed-form tail).  A finite ``max_order`` trades
    exactness for speed on long sequences: orders at or above the cap are
    treated as uniform, and results are flagged approximate via
    :meth:`exact_for`.
    """

    max_order: int | None = None
    weights: WeightSequence = LOG_WEIGHTS

    def _n_orders(self, ms: MultiSample) -> int:
        m = ms.max_length
        return m if self.max_order is None else min(m, self.max_order)

    def exact_for(self, x) -> bool:
        ms = as_multisample(x)
        return self.max_order is None or ms.max_length <= self.max_order

    def log2(self, x: Sequence | MultiSample) -> float:
        ms = as_multisample(x)
        n_orders = self._n_orders(ms)
        terms = np.empty(n_orders + 1)
        for m in range(n_orders):
            terms[m] = self.weights.log2_weight(m + 1) + _add_beta_log2(ms, m, 0.5)
        terms[n_orders] = (
            self.weights.log2_tail(n_orders + 1)
            - ms.total_length * math.log2(ms.alphabet.size)
        )
        return log2_sum(terms)

    def prob(self, x) -> float:
        return exp2(self.log2(x))

    def cond(self, x, a: int) -> float:
        return float(self.cond_dist(x)[a])

    def cond_dist(self, x) -> np.ndarray:
        ms = as_multisample(x)
        sc = MixtureScorer(ms.alphabet, priming=ms, continue_last=True,
                           max_order=self.max_order, weights=self.weights)
        return sc.cond_dist()

    def cond_new_sample(self, x, z: Sequence) -> float:
        """Probability of ``z`` as a fresh boundary-separated sample given ``x``."""
        ms = as_multisample(x)
        if len(z) == 0:
            raise DataError("conditioning word must be nonempty")
        return exp2(self.log2(ms.with_new_sample(z)) - self.log2(ms))

    def scorer(self, alphabet: Alphabet, priming=None, continue_last=False) -> MixtureScorer:
        return MixtureScorer(alphabet, priming, continue_last, self.max_order,
                             weights=self.weights)


# ---------------------------------------------------------------------------
# Operation-style wrappers (linear-domain convenience for short words)
# ---------------------------------------------------------------------------

def laplace_prob(x: Sequence, order: int = 0) -> float:
    return Laplace(order).prob(x)


def laplace_cond(x: Sequence, a: int, order: int = 0) -> float:
    return Laplace(order).cond(x, a)


def kt_prob(ms: Sequence | MultiSample, order: int = 0) -> float:
    return Krichevsky(order).prob(ms)


def kt_log2(ms: Sequence | MultiSample, order: int = 0) -> float:
    return Krichevsky(order).log2(ms)


def kt_cond(ms: Sequence | MultiSample, a: int, order: int = 0) -> float:
    return Krichevsky(order).cond(ms, a)


def mixture_prob(ms: Sequence | MultiSample, max_order: int | None = None) -> float:
    return KTMixture(max_order).prob(ms)


def mixture_log2(ms: Sequence | MultiSample, max_order: int | None = None) -> float:
    return KTMixture(max_order).log2(ms)


def mixture_cond(ms: Sequence | MultiSample, z: Sequence,
                 max_order: int | None = None) -> float:
    """Conditional probability of word ``z`` given ``ms``, with ``z`` treated
    as a new boundary-separated sample."""
    return KTMixture(max_order).cond_new_sample(ms, z)
