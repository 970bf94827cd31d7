from os.path import commonprefix

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from relqm.freeword import (Axis, Word, axis_of, ball, cyclic_data, is_cyclically_reduced, median,
                            parse, primitive_root, project_point_to_axis, reduce, sphere, tree_distance)

from conftest import LETTERS, nontrivial_words, words


def w(t):
    return parse(t)


class TestReduce:
    @pytest.mark.parametrize("raw,out", [("abB", "a"), ("aA", ""), ("abAB", "abAB"), ("abBA", ""), ("aAbBa", "a")])
    def test_examples(self, raw, out):
        assert reduce(raw).text == out

    def test_signed_letters(self):
        assert reduce([1, 2, -2, -1, 1]).text == "a"
        assert Word.from_letters([1, -2]).text == "aB"
        assert w("aB").letters == (1, -2)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            reduce("c", 2)
        with pytest.raises(ValueError):
            reduce([3], 2)
        with pytest.raises(ValueError):
            Word("aA")

    @given(st.text(alphabet=LETTERS, max_size=30))
    def test_idempotent(self, raw):
        r = reduce(raw)
        assert reduce(r.text) == r

    @given(st.text(alphabet=LETTERS, max_size=30))
    def test_minimal_length(self, raw):
        # reduction never lengthens and removes letters in inverse pairs
        r = reduce(raw)
        assert len(r) <= len(raw) and (len(raw) - len(r)) % 2 == 0


class TestGroupLaws:
    @given(words(), words(), words())
    def test_associative(self, x, y, z):
        assert (x * y) * z == x * (y * z)

    @given(words())
    def test_inverse(self, x):
        assert not (x * x.inverse())
        assert x.inverse().inverse() == x

    @given(words(6), st.integers(-5, 5))
    def test_power_matches_repeated_product(self, x, n):
        acc = Word("")
        step = x if n >= 0 else x.inverse()
        for _ in range(abs(n)):
            acc = acc * step
        assert x ** n == acc

    def test_shortlex(self):
        assert [x.text for x in ball(1)] == ["", "a", "A", "b", "B"]
        assert len(ball(5)) == 1 + 4 * (3 ** 5 - 1) // 2
        assert all(len(x) == 3 for x in sphere(3)) and len(sphere(3)) == 36


class TestCyclicData:
    def test_examples(self):
        cd = cyclic_data(w("baB"))
        assert (cd.conjugator.text, cd.root.text, cd.exponent, cd.translation_length) == ("b", "a", 1, 1)
        cd = cyclic_data(w("abab"))
        assert (cd.conjugator.text, cd.root.text, cd.exponent, cd.translation_length) == ("", "ab", 2, 4)
        with pytest.raises(ValueError):
            cyclic_data(w(""))

    @given(nontrivial_words(10))
    def test_reconstructs(self, g):
        cd = cyclic_data(g)
        assert cd.conjugator * cd.root ** cd.exponent * cd.conjugator.inverse() == g
        assert is_cyclically_reduced(cd.root)
        assert primitive_root(cd.root.text) == (cd.root.text, 1)

    def test_primitive_root_long(self):
        assert primitive_root("abAB" * 1000) == ("abAB", 1000)
        assert primitive_root("abaab") == ("abaab", 1)


class TestDistance:
    def test_examples(self):
        assert tree_distance(w("ab"), w("aB")) == 2
        assert tree_distance(w(""), w("abAB")) == 4
        assert tree_distance(w("a"), w("a")) == 0
        with pytest.raises(ValueError):
            tree_distance(Word("a", 2), Word("a", 3))

    def test_triangle_exhaustive_radius5(self):
        pts = [x.text for x in ball(5)]
        n = len(pts)
        D = np.zeros((n, n), dtype=np.int16)
        for i, x in enumerate(pts):
            for j, y in enumerate(pts):
                k = 0
                while k < len(x) and k < len(y) and x[k] == y[k]:
                    k += 1
                D[i, j] = len(x) + len(y) - 2 * k
        # cross-check the vectorized table against the library on a slice
        for i in range(0, n, 37):
            for j in range(0, n, 41):
                assert D[i, j] == tree_distance(w(pts[i]), w(pts[j]))
        for y in range(n):
            assert (D <= D[:, [y]] + D[[y], :]).all()

    def test_translation_length_growth(self):
        for g in ball(4)[1:]:
            tl = cyclic_data(g).translation_length
            for n in range(1, 7):
                assert tree_distance(Word(""), g ** n) >= n * tl

    @given(words(), words(), words())
    def test_median_on_all_geodesics(self, x, y, z):
        m = median(x, y, z)
        for a, b in ((x, y), (y, z), (x, z)):
            assert tree_distance(a, m) + tree_distance(m, b) == tree_distance(a, b)


class TestAxis:
    def test_examples(self):
        assert axis_of(w("abab")) == Axis.through(w(""), w("ab"))
        A = axis_of(w("baB"))
        assert (A.rep.text, A.root.text) == ("b", "a")
        assert axis_of(w("a")) == axis_of(w("aa"))
        with pytest.raises(ValueError):
            axis_of(w(""))

    def test_canonical_root(self):
        # least rotation of bab, abb, bba and their inverses
        assert axis_of(w("bab")).root.text == "abb"
        assert axis_of(w("abAB")) == Axis.through(w(""), w("abAB"))

    @given(nontrivial_words(6), st.integers(1, 4))
    def test_power_invariance(self, g, k):
        assert axis_of(g) == axis_of(g ** k) == axis_of(g ** -k)

    @given(nontrivial_words(5), words(4))
    def test_conjugation_translates(self, g, h):
        A = axis_of(g)
        B = axis_of(h * g * h.inverse())
        assert B == A.translate(h)
        pts = ball(6)
        assert {x.text for x in pts if B.contains(x)} == {x.text for x in pts if A.contains(h.inverse() * x)}

    @given(nontrivial_words(5), st.integers(-12, 12))
    def test_point_position_roundtrip(self, g, t):
        A = axis_of(g)
        assert A.position(A.point(t)) == t

    def test_equality_is_vertex_set_equality(self):
        pts = ball(5)
        axes = {}
        for r in ("a", "ab", "abb", "aB"):
            for u in ball(2):
                A = Axis.through(u, w(r))
                key = frozenset(x.text for x in pts if A.contains(x))
                axes.setdefault(A, key)
        by_set = {}
        for A, key in axes.items():
            by_set.setdefault((A.root.text, key), []).append(A)
        # distinct canonical axes with the same root meet the ball in different vertex sets
        assert all(len(v) == 1 for v in by_set.values())


class TestProjection:
    def test_examples(self):
        A = axis_of(w("a"))
        assert project_point_to_axis(w("ba"), A) == (w(""), 2)
        assert project_point_to_axis(w("aaab"), A) == (w("aaa"), 1)
        assert project_point_to_axis(w("aa"), A) == (w("aa"), 0)

    def test_window_brute_force(self):
        roots = [x for x in ball(3) if x and is_cyclically_reduced(x)]
        axes = {Axis.through(u, r) for r in roots for u in ball(2)}
        pts = [x.text for x in ball(5)]

        def dist(x: str, y: str) -> int:
            k = len(commonprefix((x, y)))
            return len(x) + len(y) - 2 * k

        for A in axes:
            per = len(A.root)
            reach = (5 + len(A.rep) + per) * per
            line = {t: A.point(t).text for t in range(-reach, reach + 1)}
            for x in pts:
                p, d = project_point_to_axis(Word(x), A)
                window = (len(x) + len(A.rep) + per) * per
                assert d == min(dist(x, line[t]) for t in range(-window, window + 1))
                assert A.contains(p)

    @given(words(7), nontrivial_words(4), words(3))
    def test_window_random(self, x, r, u):
        _, core = cyclic_data(r).conjugator, cyclic_data(r).root
        A = Axis.through(u, core)
        p, d = project_point_to_axis(x, A)
        window = (len(x) + len(A.rep) + len(A.root)) * len(A.root)
        assert d == min(tree_distance(x, A.point(t)) for t in range(-window, window + 1))
