import itertools
import math

import numpy as np
import pytest

from ktmix.alphabet import Alphabet, DataError, Sequence
from ktmix.coding import (
    BuiltinCode,
    CodeMeasure,
    Compressor,
    CompressorError,
    ExternalCompressor,
    builtin_code_length,
    code_length,
    conditional_from_code,
    kraft_check,
    measure_from_code,
)
from ktmix.measures import KTMixture, mixture_log2, mixture_prob

BIN = Alphabet.binary()


def seq(text):
    return Sequence.from_text(text, BIN)


def words(n):
    for w in itertools.product("01", repeat=n):
        yield seq("".join(w))


class FixedLengths(Compressor):
    """Stub: looks lengths up in a table, constant fallback."""

    def __init__(self, table=None, default=4):
        self.table = {k: v for k, v in (table or {}).items()}
        self.default = default

    def code_length(self, x):
        return self.table.get(x.text(), self.default)


class TestBuiltinCode:
    def test_empty_word_is_one_bit(self):
        assert builtin_code_length(Sequence.empty(BIN)) == 1

    def test_pair_value_from_mixture(self):
        # -log2(0.29613...) = 1.7557 -> ceil 2, plus 1 bit overhead
        assert builtin_code_length(seq("00")) == 3

    def test_exact_power_of_two_not_bumped(self):
        # a word the mixture gives exactly 2**-k must code to k + overhead
        empty = Sequence.empty(BIN)
        assert BuiltinCode().code_length(empty) == 1

    def test_determinism(self):
        x = seq("0110100")
        assert builtin_code_length(x) == builtin_code_length(x)

    def test_monotone_under_extension(self):
        code = BuiltinCode()
        for n in range(5):
            for w in words(n):
                base = code.code_length(w)
                for a in (0, 1):
                    assert code.code_length(w.append(a)) >= base - 1

    def test_matches_mixture_value(self):
        x = seq("01010")
        want = math.ceil(-mixture_log2(x) - 1e-9) + 1
        assert builtin_code_length(x) == want

    def test_overhead_must_keep_kraft_margin(self):
        with pytest.raises(ValueError):
            BuiltinCode(overhead_bits=0)


class TestKraftCheck:
    def test_prefix_free_pair_holds(self):
        # lengths 1 and 2 over a binary alphabet: sum 3/4 (holding does not
        # certify decodability)
        ab = Alphabet(("a", "b"))
        pairs = [
            (Sequence.from_tokens(ab, ["a"]), 1),
            (Sequence.from_tokens(ab, ["b"]), 2),
        ]
        res = kraft_check(pairs, ab, 1)
        assert res.holds and res.total == pytest.approx(0.75)

    def test_all_ones_violated(self):
        pairs = [(w, 1) for w in words(2)]
        res = kraft_check(pairs, BIN, 2)
        assert not res.holds
        assert res.total == pytest.approx(2.0)

    def test_builtin_code_over_pairs_holds(self):
        code = BuiltinCode()
        pairs = [(w, code.code_length(w)) for w in words(2)]
        res = kraft_check(pairs, BIN, 2)
        assert res.holds
        assert res.total <= 0.5  # ceiling plus one spare bit

    def test_incomplete_enumeration_rejected(self):
        pairs = [(seq("00"), 2), (seq("01"), 2)]
        with pytest.raises(DataError):
            kraft_check(pairs, BIN, 2)

    def test_duplicate_rejected(self):
        pairs = [(w, 2) for w in words(2)] + [(seq("00"), 2)]
        with pytest.raises(DataError):
            kraft_check(pairs, BIN, 2)


class TestMeasureFromCode:
    def test_symmetric_lengths_give_uniform(self):
        c = FixedLengths(default=3)
        for w in words(1):
            assert 2.0 ** measure_from_code(c, w) == pytest.approx(0.5, rel=1e-12)

    def test_worked_normalization(self):
        c = FixedLengths({"00": 2, "01": 3, "10": 3, "11": 2})
        # Z = 1/4 + 1/8 + 1/8 + 1/4 = 3/4
        assert 2.0 ** measure_from_code(c, seq("00")) == pytest.approx(1 / 3, rel=1e-12)
        assert 2.0 ** measure_from_code(c, seq("01")) == pytest.approx(1 / 6, rel=1e-12)

    def test_builtin_within_quantization_slack_of_mixture(self):
        code = BuiltinCode()
        for w in words(2):
            mu = 2.0 ** measure_from_code(code, w)
            ratio = mu / mixture_prob(w)
            assert 0.25 <= ratio <= 4.0

    def test_enumeration_cap(self):
        c = FixedLengths(default=2)
        long_word = Sequence(BIN, np.zeros(40, dtype=np.int64))
        with pytest.raises(DataError, match="conditional_from_code"):
            measure_from_code(c, long_word)


class TestConditionalFromCode:
    def test_equal_extensions_give_uniform(self):
        c = FixedLengths(default=5)
        dist = conditional_from_code(c, seq("0101"))
        assert tuple(dist) == (0.5, 0.5)

    def test_sums_to_one_exactly(self):
        c = FixedLengths({"010100": 3, "010101": 9})
        dist = conditional_from_code(c, seq("01010"))
        assert dist.sum() == 1.0
        assert dist[0] > dist[1]

    def test_builtin_tracks_mixture_conditional(self):
        dist = conditional_from_code(BuiltinCode(), seq("01010"))
        want = KTMixture().cond_dist(seq("01010"))
        assert np.abs(dist - want).sum() <= 0.15


class TestExternalCompressor:
    def test_identity_command_is_eight_bits_per_symbol(self):
        cat = ExternalCompressor("cat")
        x = Sequence(BIN, np.zeros(100, dtype=np.int64))
        assert code_length(cat, x) == 800

    def test_template_mode(self):
        cp = ExternalCompressor("cp {in} {out}")
        x = Sequence(BIN, np.ones(64, dtype=np.int64))
        assert cp.code_length(x) == 512

    def test_determinism_across_instances(self):
        x = seq("0110010101")
        a = ExternalCompressor("gzip -n -c").code_length(x)
        b = ExternalCompressor("gzip -n -c").code_length(x)
        assert a == b

    def test_repetitive_beats_random(self):
        gz = ExternalCompressor("gzip -n -c")
        rep = Sequence(BIN, np.tile(np.array([0, 1], dtype=np.int64), 1000))
        rnd = Sequence(BIN, np.random.default_rng(0).integers(0, 2, 2000))
        assert gz.code_length(rep) < gz.code_length(rnd)

    def test_missing_binary(self):
        ec = ExternalCompressor("definitely-not-a-real-compressor-xyz")
        with pytest.raises(CompressorError, match="not found"):
            ec.code_length(seq("01"))

    def test_nonzero_exit_reports_diagnostics(self):
        ec = ExternalCompressor("gzip --bogus-flag")
        with pytest.raises(CompressorError, match="exited"):
            ec.code_length(seq("01"))

    def test_large_alphabet_rejected(self):
        big = Alphabet.of_size(300)
        ec = ExternalCompressor("cat")
        with pytest.raises(DataError):
            ec.code_length(Sequence(big, np.array([299], dtype=np.int64)))

    def test_cache_hits(self):
        calls = []

        class Counting(ExternalCompressor):
            def _run(self, data):
                calls.append(data)
                return data

        ec = Counting("unused")
        x = seq("0101")
        assert ec.code_length(x) == ec.code_length(x)
        assert len(calls) == 1


class TestUniversalityProxy:
    def test_per_symbol_length_near_entropy_rate(self):
        # Bernoulli(0.2): H = 0.7219 bits; per-symbol built-in code length
        # should sit within 0.05 of it at t = 10^5.
        from ktmix.processes import BernoulliSource

        src = BernoulliSource(0.2)
        code = BuiltinCode(measure=KTMixture(max_order=4))
        rng = np.random.default_rng(20)
        t = 100_000
        rates = [code.code_length(src.sample(t, rng)) / t for _ in range(5)]
        assert abs(float(np.mean(rates)) - src.entropy_rate()) < 0.05


class TestCodeMeasure:
    def test_conditional_mode_is_raw_weight(self):
        c = FixedLengths({"01": 5})
        cm = CodeMeasure(c)
        assert cm.log2(seq("01")) == -5.0

    def test_exact_mode_matches_function(self):
        c = FixedLengths({"00": 2, "01": 3, "10": 3, "11": 2})
        cm = CodeMeasure(c, mode="exact")
        assert cm.log2(seq("00")) == pytest.approx(
            measure_from_code(c, seq("00")), abs=1e-12
        )

    def test_scorer_rejects_multi_sample_priming(self):
        from ktmix.alphabet import diamond_concat

        cm = CodeMeasure(FixedLengths())
        priming = diamond_concat([seq("01"), seq("10")])
        with pytest.raises(DataError):
            cm.scorer(BIN, priming=priming, continue_last=True)

    def test_scorer_steps_sum_conditionals(self):
        cm = CodeMeasure(BuiltinCode())
        sc = cm.scorer(BIN)
        total = 0.0
        for a in (0, 1, 0):
            total += sc.push(a)
        assert sc.log2_total == pytest.approx(total, abs=1e-12)
