import itertools

import numpy as np
import pytest

from ktmix.alphabet import (
    Alphabet,
    DataError,
    MultiSample,
    Sequence,
    context_counts,
    count_occurrences,
    diamond_concat,
    _count_tuples,
    ContextCounts,
)

from oracles import count_brute

BIN = Alphabet.binary()


def seq(text, alphabet=BIN):
    return Sequence.from_text(text, alphabet)


def ms(*texts, alphabet=BIN):
    return diamond_concat([seq(t, alphabet) for t in texts])


class TestAlphabet:
    def test_basic_roundtrip(self):
        a = Alphabet(("a", "b", "c"))
        assert a.size == 3
        assert a.index("b") == 1
        assert a.token(2) == "c"

    def test_duplicate_symbols_rejected(self):
        with pytest.raises(DataError):
            Alphabet(("x", "x"))

    def test_from_spec_char_and_token_modes(self):
        assert Alphabet.from_spec("01").symbols == ("0", "1")
        assert Alphabet.from_spec("up,down,flat").symbols == ("up", "down", "flat")

    def test_unknown_token(self):
        with pytest.raises(DataError):
            seq("012")


class TestSequence:
    def test_length_and_indices(self):
        s = seq("0101")
        assert len(s) == 4
        assert list(s.data) == [0, 1, 0, 1]

    def test_out_of_range_index_rejected(self):
        with pytest.raises(DataError):
            Sequence(BIN, np.array([0, 2]))

    def test_immutable(self):
        s = seq("01")
        with pytest.raises(ValueError):
            s.data[0] = 1

    def test_append_copies(self):
        s = seq("01")
        s2 = s.append(0)
        assert len(s) == 2 and len(s2) == 3
        assert s2.tokens() == ("0", "1", "0")


class TestCountOccurrences:
    def test_worked_example_0010_011(self):
        assert count_occurrences(ms("0010", "011"), seq("00")) == 1

    def test_worked_example_0101_101(self):
        m = ms("0101", "101")
        assert count_occurrences(m, seq("01")) == 3
        assert count_occurrences(m, seq("0101")) == 1
        assert count_occurrences(m, seq("10")) == 2
        assert count_occurrences(m, seq("00")) == 0

    def test_empty_sample(self):
        assert count_occurrences(ms(""), seq("0")) == 0

    def test_empty_word_rejected(self):
        with pytest.raises(DataError):
            count_occurrences(ms("01"), Sequence.empty(BIN))

    def test_alphabet_mismatch(self):
        other = Alphabet(("a", "b"))
        with pytest.raises(DataError):
            count_occurrences(ms("01"), Sequence.from_text("ab", other))

    def test_boundary_never_crossed_exhaustive(self):
        # For every binary x, y with |x|,|y| <= 4 and every word of length >= 2,
        # counting in x <> y equals counting in x plus counting in y, never in xy.
        words = [list(w) for ell in (2, 3) for w in itertools.product((0, 1), repeat=ell)]
        for nx, ny in itertools.product(range(5), repeat=2):
            for xd in itertools.product((0, 1), repeat=nx):
                for yd in itertools.product((0, 1), repeat=ny):
                    m = diamond_concat([Sequence(BIN, np.array(xd, dtype=np.int64)),
                                        Sequence(BIN, np.array(yd, dtype=np.int64))])
                    for w in words:
                        got = count_occurrences(m, Sequence(BIN, np.array(w, dtype=np.int64)))
                        assert got == count_brute([list(xd), list(yd)], w)

    def test_cross_boundary_match_is_excluded(self):
        # "01" matches across the join of 0 and 1 but not inside either part.
        joined = count_brute([[0, 1]], [0, 1])
        split = count_occurrences(ms("0", "1"), seq("01"))
        assert joined == 1 and split == 0

    def test_count_upper_bound(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            parts = [rng.integers(0, 2, rng.integers(0, 9)) for _ in range(3)]
            m = diamond_concat([Sequence(BIN, p) for p in parts])
            for ell in (1, 2, 3):
                w = Sequence(BIN, rng.integers(0, 2, ell))
                bound = sum(max(len(p) - ell + 1, 0) for p in parts)
                assert count_occurrences(m, w) <= bound


class TestContextCounts:
    def test_order2_subsequence_decomposition(self):
        # OOIOIIOOIIIOIO: letters following OO, OI, IO, II.
        oi = Alphabet(("O", "I"))
        cc = context_counts(seq("OOIOIIOOIIIOIO", oi), 2)
        table = {v: list(row) for v, row in cc.table.items()}
        assert table[(0, 0)] == [0, 2]   # after OO: I, I
        assert table[(0, 1)] == [2, 2]   # after OI: O, I, I, O
        assert table[(1, 0)] == [1, 2]   # after IO: I, O, I
        assert table[(1, 1)] == [2, 1]   # after II: O, I, O

    def test_order0_multisample(self):
        cc = context_counts(ms("0101", "101"), 0)
        assert list(cc.table[()]) == [3, 4]
        assert cc.row_sums[()] == 7

    def test_empty(self):
        cc = context_counts(ms(""), 0)
        assert cc.table == {}
        assert cc.total() == 0

    def test_row_sum_consistency_and_total(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            parts = [rng.integers(0, 3, rng.integers(0, 12)) for _ in range(2)]
            a3 = Alphabet(("a", "b", "c"))
            m = diamond_concat([Sequence(a3, p) for p in parts])
            for order in range(4):
                cc = context_counts(m, order)
                for v, row in cc.table.items():
                    assert len(v) == order
                    assert cc.row_sums[v] == row.sum()
                assert cc.total() == sum(max(len(p) - order, 0) for p in parts)

    def test_encoded_and_tuple_paths_agree(self):
        rng = np.random.default_rng(11)
        parts = [rng.integers(0, 2, 40), rng.integers(0, 2, 17)]
        m = diamond_concat([Sequence(BIN, p) for p in parts])
        for order in range(5):
            fast = context_counts(m, order)
            slow = ContextCounts(BIN, order)
            _count_tuples(m, order, slow)
            assert {v: tuple(r) for v, r in fast.table.items()} == {
                v: tuple(r) for v, r in slow.table.items()
            }

    def test_negative_order_rejected(self):
        with pytest.raises(DataError):
            context_counts(ms("01"), -1)


class TestDiamondConcat:
    def test_worked_example_shape(self):
        m = ms("0101", "101")
        assert len(m.samples) == 2
        assert m.total_length == 7
        assert m.max_length == 4

    def test_single_sample_reduces_to_plain_counting(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = rng.integers(0, 2, rng.integers(1, 15))
            s = Sequence(BIN, x)
            m = diamond_concat([s])
            for ell in (1, 2, 3):
                w = Sequence(BIN, rng.integers(0, 2, ell))
                assert count_occurrences(m, w) == count_brute([list(x)], list(w.data))

    def test_empty_part_contributes_nothing(self):
        m = ms("", "01")
        assert m.total_length == 2
        assert count_occurrences(m, seq("01")) == 1

    def test_mixed_alphabets_rejected(self):
        other = Alphabet(("a", "b"))
        with pytest.raises(DataError):
            diamond_concat([seq("01"), Sequence.from_text("ab", other)])

    def test_empty_parts_list_rejected(self):
        with pytest.raises(DataError):
            diamond_concat([])
