from fractions import Fraction
import numpy as np
import pytest
from hypothesis import given, settings

from relqm.barrier import FiniteIndexError
from relqm.countqm import QmSpec, defect_scan, h_value, homogenize, stable_value
from relqm.family import (FamilyError, FamilyMember, FamilySchedule, PairConfig, SuiteRadii,
                          bounded_generation_report, choose_all_r, choose_r, independence_matrix,
                          make_family, make_member, member_spec, non_equivalent, property_suite,
                          schottky_certificate, vanishing_check)
from relqm.freeword import exponent_sums, is_cyclically_reduced, parse, primitive_root
from relqm.stallings import build, factor_free

from conftest import words


def w(t):
    return parse(t)


HA = build([w("a")])
PAIR = PairConfig(w("bab"), w("baab"))


@pytest.fixture(scope="module")
def fam3():
    return choose_all_r(make_family(PAIR, FamilySchedule(4, 3)), protection=w("b"))


class TestPairs:
    @pytest.mark.parametrize("x,y,expected", [("ab", "ba", False), ("abAB", "aabbAABB", True),
                                              ("abab", "ab", False), ("bab", "bba", False),
                                              ("bab", "baab", True), ("a", "A", False)])
    def test_non_equivalent(self, x, y, expected):
        assert non_equivalent(w(x), w(y)) is expected

    def test_schottky(self):
        r = schottky_certificate(w("abAB"), w("aabbAABB"))
        assert r.rank == 2 and r.ok
        r = schottky_certificate(w("a"), w("a"))
        assert r.rank == 1 and not r.ok
        r = schottky_certificate(w("a"), w("b"))
        assert r.rank == 2 and r.L1 == 0
        assert schottky_certificate(w("bab"), w("baab")).L1 == Fraction(3, 2)
        with pytest.raises(ValueError):
            schottky_certificate(w("a"), w("b"), p=0)

    def test_power_growth_beyond_tested_words(self):
        # the constant measured on short words bounds cancellation in long commutators
        g1, g2 = PAIR.g1, PAIR.g2
        L1 = schottky_certificate(g1, g2).L1
        for n in range(1, 5):
            for m in range(1, 5):
                a, b = g1 ** n, g2 ** m
                f = a * b * a.inverse() * b.inverse()
                for k in range(1, 5):
                    assert len(f ** k) >= k * (len(f) - 2 * L1)


class TestMembers:
    def test_examples(self):
        pair = PairConfig(w("a"), w("b"))
        assert make_member(pair, 1, 1).f.text == "abAB"
        assert make_member(pair, 2, 1).f.text == "aabAAB"
        with pytest.raises(FamilyError):
            make_member(PairConfig(w("a"), w("a")), 1, 1)
        with pytest.raises(ValueError):
            PairConfig(w(""), w("a"))

    def test_schedule(self):
        assert FamilySchedule(4, 3).exponents == [(4, 16), (64, 256), (1024, 4096)]
        assert FamilySchedule(2, 2, 3).exponents == [(6, 12), (24, 48)]
        with pytest.raises(ValueError):
            FamilySchedule(1, 3)

    def test_family_invariants(self, fam3):
        lens = [len(x.f) for x in fam3]
        assert lens == [144, 2424, 38904]
        prev = 0
        for x in fam3:
            n, m = x.exponents
            assert prev < n < m
            prev = m
            assert not any(exponent_sums(x.f))
            assert is_cyclically_reduced(x.f)
            assert primitive_root(x.f.text)[1] == 1
            assert x.conjugator.text == "ba"
            assert x.protection.text == "b"
            core = x.f.text
            assert x.f.inverse().text not in core + core
            raw = x.conjugator * x.f * x.conjugator.inverse()
            g1, g2 = PAIR.g1 ** n, PAIR.g2 ** m
            assert raw == g1 * g2 * g1.inverse() * g2.inverse()

    def test_rejections(self):
        with pytest.raises(FamilyError):
            make_family(PairConfig(w("bab"), w("bba")), FamilySchedule(4, 2))
        with pytest.raises(FamilyError):
            make_family(PairConfig(w("ab"), w("ab"), commutator_form=False), FamilySchedule(2, 2))
        with pytest.raises(OverflowError):
            make_family(PAIR, FamilySchedule(4, 5), budget=10_000)


class TestChooseR:
    def test_examples(self, fam3):
        fam = [FamilyMember(1, w("abAB"))]
        assert choose_r(1, fam) == 1
        assert [choose_r(i, fam3) for i in (1, 2, 3)] == [1, 1, 1]
        with pytest.raises(FamilyError):
            choose_r(1, fam, cap=0)

    def test_protection_forces_power(self):
        # no power of abAB contains aa or AA
        fam = [FamilyMember(1, w("aabAB"))]
        assert choose_r(1, fam, protection=w("aa")) == 1
        with pytest.raises(FamilyError):
            choose_r(1, [FamilyMember(1, w("abAB"))], protection=w("aa"), cap=3)

    def test_clash_needs_larger_r(self):
        # powers of f_2 = f_1^2 sit inside f_1^m until they outgrow m <= M_test
        fam = [FamilyMember(1, w("abAB")), FamilyMember(2, w("abABabAB"))]
        assert choose_r(2, fam, M_test=4) == 3
        assert choose_r(2, fam, M_test=6) == 4
        with pytest.raises(FamilyError):
            choose_r(2, fam, cap=2)


class TestSuite:
    def test_flagship_passes(self, fam3):
        rep = property_suite(fam3, [HA], SuiteRadii(3, 10))
        assert rep.ok and rep.items == {1: True, 2: True, 3: True, 4: True, 5: True}
        assert rep.exact_vanishing == {0: True}

    def test_single_member(self, fam3):
        rep = property_suite(fam3[:1], [HA], SuiteRadii(2, 8))
        assert rep.ok

    def test_bad_r_fixture_fails_item_1(self):
        fam = [FamilyMember(1, w("abAB")), FamilyMember(2, w("abABaabbAABB"))]
        rep = property_suite(fam, [HA], SuiteRadii(2, 6))
        assert not rep.ok and rep.failed_item == 1
        assert rep.witnesses[1]["i"] == 1 and rep.witnesses[1]["j"] == 2

    def test_weight_guard(self, fam3):
        with pytest.raises(FamilyError):
            property_suite(fam3, [HA], W=2)
        with pytest.raises(FamilyError):
            independence_matrix(fam3, 1, W=2)


class TestVanishing:
    def test_subgroup_factor_pattern_fails(self):
        rep = vanishing_check(QmSpec.of("aa"), HA, 6)
        assert rep.witness == ("aa", 1) and not rep.exact

    def test_routes(self):
        assert vanishing_check(QmSpec.of("ab"), HA, 8).route == "pattern"
        rep = vanishing_check(QmSpec.of("abab"), HA, 8, protection=w("b"))
        assert rep.route == "protection" and rep.exact and rep.witness is None
        rep = vanishing_check(QmSpec.of("abab"), build([w("ab")]), 8, protection=w("b"))
        assert rep.route == "" and rep.witness is not None

    @pytest.mark.parametrize("gens,pat", [(("a",), "bab"), (("bb",), "abaab"), (("a", "baB"), "abba")])
    def test_protection_propagates(self, gens, pat):
        H = build([w(g) for g in gens])
        s = QmSpec.of(pat)
        prot = next(x for x in (w("b"), w("ab"), w("aba"), w("bb")) if x.text in pat and factor_free(H, x))
        rep = vanishing_check(s, H, 12, protection=prot)
        assert rep.exact and rep.witness is None


class TestMatrix:
    def test_diagonal(self, fam3):
        for m in (1, 2, 3):
            cert = independence_matrix(fam3, m)
            assert cert.ok
            assert np.array_equal(cert.matrix, m * np.eye(3, dtype=np.int64))
        assert independence_matrix(fam3[:1], 1).matrix.tolist() == [[1]]

    def test_degenerate(self, fam3):
        cert = independence_matrix(fam3, 0)
        assert cert.degenerate and not cert.ok and not cert.matrix.any()
        with pytest.raises(ValueError):
            independence_matrix(fam3, -1)

    def test_matches_h_value(self, fam3):
        cert = independence_matrix(fam3[:2], 2)
        for i in range(2):
            for j in range(2):
                assert cert.matrix[i, j] == h_value(member_spec(fam3[i]), fam3[j].power(2))


@pytest.fixture(scope="module")
def small():
    return choose_all_r(make_family(PAIR, FamilySchedule(2, 2)), protection=w("b"))


class TestClassFunction:
    def test_conjugation_bounded(self, small):
        for x in small:
            s = member_spec(x)
            d = defect_scan(s, 2).empirical_defect
            d = max(d, 1)
            for m in range(1, 5):
                f = x.power(m)
                hf = h_value(s, f)
                for t in (w(""), w("a"), w("Ba"), w("abA"), w("bbb")):
                    assert abs(h_value(s, t * f * t.inverse()) - hf) <= 2 * d

    @given(words(3))
    @settings(max_examples=40)
    def test_homogenized_conjugates_agree(self, t):
        s = QmSpec.of("abAB")
        f = w("abABaB")
        a, b = homogenize(s, f, 8, defect=1), homogenize(s, t * f * t.inverse(), 8, defect=1)
        assert abs(a.value - b.value) <= a.error_bound + b.error_bound
        assert stable_value(s, f) == stable_value(s, t * f * t.inverse())


class TestBoundedGeneration:
    def test_flagship(self, fam3):
        rep = bounded_generation_report(fam3[0], [HA], N=3, radius=3, samples=300)
        assert rep.slope == 1 and rep.empirical_defect == 1 and rep.m_star == 4
        assert rep.ok and rep.max_product <= rep.bound and rep.m_star * rep.slope > rep.bound

    def test_zero_products(self, fam3):
        rep = bounded_generation_report(fam3[0], [HA], N=0, radius=2)
        assert rep.n_products == 1 and rep.max_product == 0

    def test_finite_index_refused(self, fam3):
        with pytest.raises(FiniteIndexError):
            bounded_generation_report(fam3[0], [build([w("a"), w("b")])], N=3, radius=2)

    def test_seeded(self, fam3):
        a = bounded_generation_report(fam3[0], [HA], N=2, radius=2, samples=100, seed=5)
        b = bounded_generation_report(fam3[0], [HA], N=2, radius=2, samples=100, seed=5)
        assert a == b
