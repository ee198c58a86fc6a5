
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrgfield import words as W


def word(text: str) -> W.Word:
    return W.parse_word(text)


class TestCanonical:
    def test_rotation_invariance(self):
        a = W.canonical([W.Letter(1, 1), W.Letter(2, 1), W.Letter(1, -1), W.Letter(2, -1)])
        b = W.canonical([W.Letter(2, 1), W.Letter(1, -1), W.Letter(2, -1), W.Letter(1, 1)])
        assert a == b

    def test_inversion_invariance(self):
        a = W.canonical([W.Letter(1, 1), W.Letter(2, 1)])
        b = W.canonical([W.Letter(2, -1), W.Letter(1, -1)])
        assert a == b

    def test_not_reduced_rejected(self):
        with pytest.raises(W.NotCyclicallyReduced):
            W.canonical([W.Letter(1, 1), W.Letter(1, -1)])
        with pytest.raises(W.NotCyclicallyReduced):
            W.canonical([W.Letter(1, 1), W.Letter(2, 1), W.Letter(2, -1)])

    def test_idempotent(self):
        for w in W.enumerate_classes(2, 4):
            assert W.canonical(w.codes) == w

    @settings(max_examples=200, deadline=None, derandomize=True)
    @given(st.data())
    def test_orbit_elements_map_to_same_word(self, data):
        d = data.draw(st.integers(1, 3))
        k = data.draw(st.integers(1, 6))
        codes = data.draw(
            st.lists(st.integers(0, 2 * d - 1), min_size=k, max_size=k).filter(W._is_reduced)
        )
        w = W.canonical(codes)
        r = data.draw(st.integers(0, k - 1))
        rotated = tuple(codes[r:]) + tuple(codes[:r])
        assert W.canonical(rotated) == w
        assert W.canonical(W._invert(tuple(codes))) == w

    def test_letter_inverse_involution(self):
        l = W.Letter(3, -1)
        assert l.inverse().inverse() == l
        assert W.Letter.from_code(l.code) == l


class TestStats:
    def test_paper_figure_example(self):
        assert W.word_stats(word("p2.P1.p2.p1.p2.P3")) == (6, 1, 2, 0)

    def test_double_letter_word(self):
        assert W.word_stats(word("p1.p1")) == (2, 2, 2, 2)

    def test_alternating_signs(self):
        assert W.word_stats(word("p1.P2")) == (2, 1, 0, 0)

    def test_sign_change_count_even(self):
        for w in W.enumerate_classes(2, 5):
            changes = w.length - w.b
            assert changes % 2 == 0
            assert 1 <= w.h <= w.length and w.length % w.h == 0
            assert 0 <= w.b <= w.length and 0 <= w.c <= w.length

    def test_cyclic_b_reading(self):
        # the inline example in the source text gives b = 2 under a non-cyclic
        # reading; rotation invariance forces the cyclic value 3
        w = word("p1.p1.P2.P2.p1")
        assert w.b == 3 and w.c == 3


class TestACount:
    @pytest.mark.parametrize("d,k,expected", [(2, 1, 4), (2, 2, 12), (1, 2, 2)])
    def test_values(self, d, k, expected):
        assert W.a_count(d, k) == expected

    def test_matches_direct_sequence_count(self):
        for d in (1, 2):
            for k in range(1, 7):
                count = sum(1 for _ in W._reduced_sequences(d, k))
                assert count == W.a_count(d, k)


class TestEnumerate:
    def test_small_cases(self):
        assert {str(w) for w in W.enumerate_classes(2, 1)} == {"p1", "p2"}
        assert [str(w) for w in W.enumerate_classes(1, 2)] == ["p1.p1"]
        got = {str(w) for w in W.enumerate_classes(2, 2)}
        assert got == {"p1.p1", "p2.p2", "p1.p2", "p1.P2"}

    def test_weighted_count_identity(self):
        for d in (1, 2, 3):
            for k in range(1, 7):
                classes = W.enumerate_classes(d, k)
                assert sum(w.orbit_size() for w in classes) == W.a_count(d, k)
                assert len(set(classes)) == len(classes)

    def test_orbit_size_matches_explicit_orbit(self):
        for w in W.enumerate_classes(3, 5):
            assert len(w.orbit()) == 2 * w.length // w.h

    def test_budget(self):
        with pytest.raises(W.BudgetExceeded):
            W.enumerate_classes(3, 12, budget=1000)


class TestDoublingHalving:
    def test_double_examples(self):
        assert W.double_letter(word("p1.p2"), 1) == word("p1.p1.p2")
        assert W.double_letter(word("p1"), 1) == word("p1.p1")

    def test_double_preserves_sign_changes(self):
        for w in W.enumerate_classes(2, 4):
            for i in range(1, w.length + 1):
                v = W.double_letter(w, i)
                assert v.length == w.length + 1
                assert v.b == w.b + 1
                assert v.c >= w.c + 1
                assert v.length - v.b == w.length - w.b

    def test_halving_examples(self):
        hs = W.halvings(word("p1.p2.p3.p4.p1"))
        assert len(hs) == 1 and hs[0][1] == word("p1.p2.p3.p4")
        hs = W.halvings(word("p1.p1"))
        assert len(hs) == 2 and all(u == word("p1") for _, u in hs)
        assert W.halvings(word("p1")) == [(1, W.DEATH)]

    def test_halving_count_is_c(self):
        for w in W.enumerate_classes(2, 5):
            assert len(W.halvings(w)) == w.c

    def test_adjointness_weighted(self):
        # detailed-balance form of the doubling/halving duality:
        # (halving multiplicity w -> u) * h(u) = (doubling count u -> w) * h(w)
        for k in range(2, 6):
            ws = W.enumerate_classes(2, k)
            us = W.enumerate_classes(2, k - 1)
            for wv in ws:
                mult: dict[W.Word, int] = {}
                for _, u in W.halvings(wv):
                    mult[u] = mult.get(u, 0) + 1
                for uv in us:
                    a = sum(W.double_letter(uv, i) == wv for i in range(1, uv.length + 1))
                    j = mult.get(uv, 0)
                    assert j * uv.h == a * wv.h, (wv, uv)


class TestTableAndText:
    def test_class_table_build(self):
        table = W.WordClassTable.build(2, 4)
        assert sorted(table.classes) == [1, 2, 3, 4]
        assert len(table.all_words()) == sum(len(v) for v in table.classes.values())

    def test_render_parse_roundtrip(self):
        for w in W.enumerate_classes(2, 4):
            assert W.parse_word(W.render(w)) == w

    def test_render_style(self):
        assert W.render(word("p2.P1.p2.p1.p2.P3")) in {
            ".".join(p) for p in [tuple(str(l) for l in word("p2.P1.p2.p1.p2.P3").letters)]
        }
        assert str(W.Letter(2, 1)) == "p2" and str(W.Letter(3, -1)) == "P3"
