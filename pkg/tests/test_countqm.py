import csv
from fractions import Fraction

import pytest
from hypothesis import given
import hypothesis.strategies as st

from relqm.countqm import (QmSpec, c_value, c_value_ball, count_copies, count_copies_dp, defect_probe, defect_scan,
                           h_value, homogenize, morse_constant, oracle_c, oracle_c_ball,
                           paper_defect_bound, stable_value, write_defect_csv)
from relqm.freeword import ball, is_cyclically_reduced, parse
from relqm.stallings import build, enumerate_subgroup, factor_free

from conftest import nontrivial_words, words


def w(t):
    return parse(t)


AB = QmSpec.of("ab")


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            QmSpec.of("a")
        with pytest.raises(ValueError):
            QmSpec.of("ab", 2)
        with pytest.raises(ValueError):
            QmSpec.of("ab", 0)
        assert QmSpec.of("abb", 2).W == 2
        assert AB.inverse().w.text == "BA"


class TestCounting:
    @pytest.mark.parametrize("alpha,pat,n", [("ababab", "ab", 3), ("aaa", "aa", 1), ("abaab", "ab", 2),
                                             ("aaaa", "aa", 2), ("", "ab", 0)])
    def test_examples(self, alpha, pat, n):
        assert count_copies(alpha, pat) == n

    @given(st.text(alphabet="ab", max_size=40), st.text(alphabet="ab", min_size=1, max_size=4))
    def test_greedy_matches_dp(self, text, pat):
        assert count_copies(text, pat) == count_copies_dp(text, pat)

    def test_empty_pattern(self):
        with pytest.raises(ValueError):
            count_copies("ab", "")


class TestValues:
    def test_examples(self):
        assert c_value(AB, w("abab")) == 2
        assert c_value(AB, w("BABA")) == 0
        assert c_value(AB, w("")) == 0
        assert h_value(AB, w("abab")) == 2
        assert h_value(AB, w("BABA")) == -2
        assert h_value(AB, w("")) == 0

    def test_weight_scales(self):
        s = QmSpec.of("abb", 2)
        assert c_value(s, w("abbabb")) == 4

    @pytest.mark.parametrize("pat,W", [("ab", 1), ("aB", 1), ("abA", 1), ("abAB", 1), ("aab", 1), ("abA", 2), ("abAB", 3)])
    def test_antisymmetry(self, pat, W):
        s = QmSpec.of(pat, W)
        for g in ball(6):
            assert h_value(s, g.inverse()) == -h_value(s, g)


class TestOracle:
    def test_examples(self):
        assert oracle_c(AB, w("abab"), 8) == 2
        assert oracle_c(AB, w("ba"), 8) == 0
        assert oracle_c(AB, w(""), 0) == 0

    def test_monotone_and_stable(self):
        for g in ("abab", "aBab", "abbab", "bab"):
            vals = [oracle_c(AB, w(g), s) for s in range(0, 9)]
            assert vals == sorted(vals) and vals[-1] == vals[4]

    @pytest.mark.parametrize("pat", ["ab", "aB", "aba", "abAB"])
    def test_unit_weight_geodesic_realizes(self, pat):
        s = QmSpec.of(pat)
        for g in ball(4):
            assert c_value(s, g) == count_copies(g, s.w) == oracle_c(s, g, 2 * len(pat))

    @pytest.mark.parametrize("pat,W", [("abA", 2), ("aab", 2), ("abAB", 3), ("abbA", 3), ("abab", 2)])
    def test_exact_against_full_window(self, pat, W):
        # a walk costing at most |g| has at most |g| |w| / (|w| - W) letters
        s = QmSpec.of(pat, W)
        for g in ball(3) + [x for x in ball(4)[::4] if len(x) == 4]:
            slack = len(g) * W // (len(pat) - W)
            assert c_value(s, g) == oracle_c(s, g, slack)

    def test_detours_beat_the_geodesic(self):
        s = QmSpec.of("abAB", 3)
        assert count_copies("abA", "abAB") == 0
        assert c_value(s, w("abA")) == 1  # walk abAB.b
        s = QmSpec.of("abbA", 3)
        assert c_value(s, w("bbbbbbbb")) == 2  # walk A.(abbA)^4.a
        assert oracle_c(s, w("bbbbbbbb"), 8) == 1
        assert oracle_c(s, w("bbbbbbbb"), 12) == 2

    @pytest.mark.parametrize("pat,W", [("abA", 2), ("abAB", 3), ("ab", 1)])
    def test_ball_values_match_single(self, pat, W):
        s = QmSpec.of(pat, W)
        vals = c_value_ball(s, 5)
        assert len(vals) == len(ball(5))
        for g in ball(5)[::5]:
            assert vals[g.text] == c_value(s, g)

    def test_ball_oracle_agrees_with_single(self):
        pat = w("abA")
        vals = oracle_c_ball(pat, [1, 2], 5, 6)
        for g in ball(5)[::7]:
            for W in (1, 2):
                assert vals[W][g.text] == oracle_c(QmSpec(pat, W), g, 6)


class TestDefect:
    def test_examples(self):
        rep = defect_scan(AB, 2)
        assert rep.empirical_defect == 1
        assert rep.L0 == 4 and rep.paper_bound == 12 * 4 + 6
        assert rep.witnesses
        # copies of a length-6 pattern never fit in the radius-2 ball
        assert defect_scan(QmSpec.of("abABab"), 2).empirical_defect == 0

    def test_witnesses_attain(self):
        rep = defect_scan(AB, 3)
        for a, b in rep.witnesses:
            x, y = w(a), w(b)
            assert abs(h_value(AB, x * y) - h_value(AB, x) - h_value(AB, y)) == rep.empirical_defect

    def test_non_decreasing_and_stable(self):
        vals = [defect_scan(AB, r).empirical_defect for r in range(1, 7)]
        assert vals == sorted(vals)
        assert vals[3] == vals[4] == vals[5]
        assert vals[-1] <= paper_defect_bound(AB)

    @given(words(14), words(14))
    def test_quasimorphism_law_beyond_ball(self, x, y):
        # the defect measured on small balls holds for long words too
        assert abs(h_value(AB, x * y) - h_value(AB, x) - h_value(AB, y)) <= 1

    def test_morse_constant(self):
        assert morse_constant(QmSpec.of("ab")) == 4
        assert morse_constant(QmSpec.of("abab", 1)) == 2
        assert morse_constant(QmSpec.of("abab", 3)) == 48

    def test_probe_long_pattern(self):
        s = QmSpec.of("abAB" * 5)
        f = s.w
        assert defect_probe(s, [f, f * f]) == 1

    def test_csv(self, tmp_path):
        path = tmp_path / "defect.csv"
        write_defect_csv(path, AB, [1, 2])
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["radius", "g", "h", "deviation"]
        assert all(int(r[3]) == 1 for r in rows[1:])
        radii = [int(r[0]) for r in rows[1:]]
        assert radii == sorted(radii)
        write_defect_csv(path, AB, [2], rows="nonzero")
        assert len(list(csv.reader(open(path)))) > 1


class TestHomogenize:
    def test_examples(self):
        e = homogenize(AB, w("ab"), 16)
        assert e.value == 1 and e.error_bound == Fraction(1, 16) and e.n_used == 16
        assert homogenize(AB, w("BA"), 16).value == -1
        assert homogenize(AB, w(""), 5).value == 0
        with pytest.raises(ValueError):
            homogenize(AB, w("ab"), 0)

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            homogenize(AB, w("ab"), 10 ** 9)

    @pytest.mark.parametrize("g", ["ab", "ba", "BA", "abab", "aab", "bAB"])
    @pytest.mark.parametrize("n", [4, 8, 16])
    def test_linearity(self, g, n):
        e = homogenize(AB, w(g), n)
        assert e.value * n == h_value(AB, w(g) ** n)

    @given(nontrivial_words(6).filter(lambda g: is_cyclically_reduced(g)), st.integers(1, 4))
    def test_power_linearity(self, g, k):
        # copies straddling period boundaries make h(g^n) affine in n, with exact slope stable_value
        n = 6
        a, b = h_value(AB, g ** n), h_value(AB, g ** (k * n))
        slope = stable_value(AB, g)
        assert b - a == slope * (k * n - n)

    @given(nontrivial_words(6), st.sampled_from(["ab", "aB", "abA", "aabb"]))
    def test_stable_value_within_defect_bound(self, g, pat):
        s = QmSpec.of(pat)
        n = 32
        est = homogenize(s, g, n, defect=defect_scan(s, 3).empirical_defect)
        assert abs(est.value - stable_value(s, g)) <= Fraction(2 * max(1, defect_scan(s, 3).empirical_defect) + 2 * len(g), n) + est.error_bound


    @pytest.mark.parametrize("pat,W", [("abA", 2), ("aab", 2), ("abbA", 3), ("ab", 1), ("abAB", 1)])
    @pytest.mark.parametrize("g", ["ab", "aab", "abbA", "bbbb", "aBAb", "abAB"])
    def test_stable_value_is_eventual_slope(self, pat, W, g):
        s, x = QmSpec.of(pat, W), w(g)
        assert stable_value(s, x) == Fraction(h_value(s, x ** 40) - h_value(s, x ** 20), 20)

    def test_stable_value_conjugation_invariant(self):
        s = QmSpec.of("abbA", 3)
        for g in ("bbab", "abA", "aab"):
            for t in ("a", "bA", "Bab"):
                assert stable_value(s, w(t) * w(g) * w(t).inverse()) == stable_value(s, w(g))


class TestVanishing:
    @pytest.mark.parametrize("gens,pat", [(("a",), "ab"), (("ab",), "aa"), (("a", "baB"), "bb"), (("bb",), "aba")])
    def test_factor_free_implies_zero(self, gens, pat):
        H = build([w(g) for g in gens])
        s = QmSpec.of(pat)
        assert factor_free(H, s.w)
        assert all(h_value(s, h) == 0 for h in enumerate_subgroup(H, 12))
