"""An independent family of counting quasimorphisms vanishing on given subgroups.

Each member ``f_i`` is a commutator ``[g1^n_i, g2^m_i]`` stored cyclically
reduced, and ``h_i`` counts copies of ``f_i^r_i`` with weight one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .barrier import BarrierParams, FiniteIndexError, FINITE_INDEX_MESSAGE, has_barrier
from .countqm import (MAX_POWER_LENGTH, QmSpec, count_copies, defect_probe, defect_scan,
                      h_value, stable_value)
from .freeword import (Word, _inverse_text, _peel, ball, exponent_sums,
                       primitive_root)
from .stallings import SubgroupAutomaton, build, enumerate_subgroup, factor_free, index_and_gauge

__all__ = [
    "PairConfig", "FamilySchedule", "FamilyMember", "IndependenceCertificate", "SchottkyReport",
    "SuiteRadii", "SuiteReport", "VanishingReport", "BoundedGenerationReport", "non_equivalent",
    "schottky_certificate", "make_family", "make_member", "choose_r", "choose_all_r", "member_spec",
    "property_suite", "independence_matrix", "vanishing_check", "bounded_generation_report",
    "FamilyError",
]


class FamilyError(ValueError):
    """A family construction or verification step failed."""


@dataclass(frozen=True)
class PairConfig:
    g1: Word
    g2: Word
    commutator_form: bool = True

    def __post_init__(self) -> None:
        if not self.g1 or not self.g2:
            raise ValueError("g1 and g2 must be nontrivial")


@dataclass(frozen=True)
class FamilySchedule:
    base: int = 4
    N: int = 5
    scale: int = 1

    def __post_init__(self) -> None:
        if self.base < 2 or self.N < 1 or self.scale < 1:
            raise ValueError("need base >= 2, N >= 1, scale >= 1")

    @property
    def exponents(self) -> list[tuple[int, int]]:
        """``(n_i, m_i) = scale * (base^(2i-1), base^(2i))``."""
        return [(self.scale * self.base ** (2 * i - 1), self.scale * self.base ** (2 * i))
                for i in range(1, self.N + 1)]


@dataclass(frozen=True)
class FamilyMember:
    index: int
    f: Word  # cyclically reduced
    r: int = 1
    protection: "Word | None" = None
    conjugator: "Word | None" = None  # raw product = conjugator * f * conjugator^-1
    exponents: tuple = ()

    def power(self, m: int = 1) -> Word:
        return self.f ** (self.r * m)

    def with_r(self, r: int, protection: "Word | None" = None) -> "FamilyMember":
        return FamilyMember(self.index, self.f, r, protection, self.conjugator, self.exponents)


def _require_unit_weight(W: int) -> None:
    # factor-based certificates read c off copy counts, which is exact only at W = 1
    if W != 1:
        raise FamilyError(f"family certificates need W = 1, got {W}")


def member_spec(member: FamilyMember, W: int = 1) -> QmSpec:
    """``h_i``: counting of ``f_i^r_i`` with weight ``W``."""
    return QmSpec(member.power(1), W)


def _root(g: Word) -> str:
    _, core = _peel(g.text)
    if not core:
        raise ValueError("identity has no axis")
    return primitive_root(core)[0]


def _same_class(x: str, y: str) -> bool:
    # cyclic words x, y agree up to rotation and inversion
    return len(x) == len(y) and (y in x + x or _inverse_text(y) in x + x)


def non_equivalent(g1: Word, g2: Word) -> bool:
    """True iff the primitive roots of ``g1`` and ``g2^{+-1}`` are not conjugate."""
    return not _same_class(_root(g1), _root(g2))


@dataclass(frozen=True)
class SchottkyReport:
    rank: int
    L1: Fraction
    ok: bool
    tested: int = 0


def schottky_certificate(g1: Word, g2: Word, p: int = 1, max_word: int = 4, max_m: int = 4) -> SchottkyReport:
    """Rank of ``<g1^p, g2^p>`` and the measured power-growth constant ``L_1``.

    ``L_1`` is the least constant with ``|f^m| >= m (|f| - 2 L_1)`` over the
    cyclically reduced words of length at most ``max_word`` in the two
    generators and ``m <= max_m``.
    """
    if p < 1:
        raise ValueError("p must be positive")
    x, y = g1 ** p, g2 ** p
    H = build([x, y])
    rank = H.graph_rank
    gens = {"x": x, "X": x.inverse(), "y": y, "Y": y.inverse()}
    inv = {"x": "X", "X": "x", "y": "Y", "Y": "y"}
    L1 = Fraction(0)
    tested = 0
    for n in range(1, max_word + 1):
        for letters in product("xXyY", repeat=n):
            if any(inv[a] == b for a, b in zip(letters, letters[1:])):
                continue
            if n > 1 and inv[letters[0]] == letters[-1]:
                continue
            f = Word("", g1.rank)
            for c in letters:
                f = f * gens[c]
            if not f:
                continue
            tested += 1
            for m in range(1, max_m + 1):
                L1 = max(L1, Fraction(m * len(f) - len(f ** m), 2 * m))
    return SchottkyReport(rank, L1, rank >= 2, tested)


def make_family(pair: PairConfig, sched: FamilySchedule, budget: int = MAX_POWER_LENGTH) -> list[FamilyMember]:
    """Members ``f_i = [g1^n_i, g2^m_i]`` (or ``g1^n_i g2^m_i``), cyclically reduced.

    ``r_i`` is left at 1; see :func:`choose_r`.
    """
    g1, g2 = pair.g1, pair.g2
    if not non_equivalent(g1, g2):
        raise FamilyError(f"{g1.text!r} and {g2.text!r} have conjugate roots")
    if not schottky_certificate(g1, g2, 1, max_word=1, max_m=1).ok:
        raise FamilyError("g1, g2 do not generate a free subgroup of rank 2")
    if not pair.commutator_form and (any(exponent_sums(g1)) or any(exponent_sums(g2))):
        raise FamilyError("product form needs g1, g2 with zero exponent sums")
    out: list[FamilyMember] = []
    for i, (n, m) in enumerate(sched.exponents, start=1):
        if n * len(g1) + m * len(g2) > budget:
            raise OverflowError(f"member {i} exceeds the word-length budget {budget}")
        x = make_member(pair, n, m, i)
        if any(_same_class(x.f.text, y.f.text) for y in out):
            raise FamilyError(f"member {i} repeats an earlier root class")
        out.append(x)
    return out


def make_member(pair: PairConfig, n: int, m: int, index: int = 1) -> FamilyMember:
    """One member for explicit exponents, cyclically reduced with its conjugator recorded."""
    a, b = pair.g1 ** n, pair.g2 ** m
    raw = a * b * a.inverse() * b.inverse() if pair.commutator_form else a * b
    if not raw:
        raise FamilyError(f"member {index} collapses to the identity")
    u, core = _peel(raw.text)
    _, e = primitive_root(core)
    if e > 1:
        raise FamilyError(f"member {index} is a proper power ({e})")
    f = raw._new(core)
    if any(exponent_sums(f)):
        raise FamilyError(f"member {index} has nonzero exponent sums {exponent_sums(f)}")
    if _rotations_meet_inverse(core):
        raise FamilyError(f"member {index} is conjugate to its inverse")
    return FamilyMember(index, f, 1, None, raw._new(u), (n, m))


def _rotations_meet_inverse(core: str) -> bool:
    # the inverse is a rotation iff it occurs in the doubled word
    return _inverse_text(core) in core + core


def choose_r(i: int, family: Sequence[FamilyMember], p: BarrierParams = BarrierParams(),
             M_test: int = 4, protection: "Word | None" = None, cap: int = 64) -> int:
    """Least ``r`` with the separation conditions for member ``i`` (1-based).

    (a) no ``f_j^{+-m}``, ``j < i``, ``m <= M_test`` contains ``f_i^{+-r}``;
    (b) no ``f_i^{rm}`` contains ``f_i^{-r}``;
    (c) ``f_i^r`` contains the protection word, when one is given.
    """
    if cap < 1:
        raise FamilyError("search cap must be positive")
    fi = family[i - 1].f
    for r in range(1, cap + 1):
        w = (fi ** r).text
        wi = (fi ** -r).text
        ok = True
        for fj in (x.f for x in family[: i - 1]):
            for m in range(1, M_test + 1):
                if len(fj) * m < len(w):
                    continue
                for t in ((fj ** m).text, (fj ** -m).text):
                    if w in t or wi in t:
                        ok = False
        if ok:
            big = (fi ** (r * M_test)).text
            ok = wi not in big
        if ok and protection is not None:
            ok = has_barrier(fi ** r, protection, p)
        if ok:
            return r
    raise FamilyError(f"no r <= {cap} separates member {i}")


def choose_all_r(family: Sequence[FamilyMember], p: BarrierParams = BarrierParams(), M_test: int = 4,
                 protection: "Word | None" = None, cap: int = 64) -> list[FamilyMember]:
    out = list(family)
    for i in range(1, len(out) + 1):
        r = choose_r(i, out, p, M_test, protection, cap)
        out[i - 1] = out[i - 1].with_r(r, protection)
    return out


@dataclass(frozen=True)
class SuiteRadii:
    powers: int = 3
    subgroup: int = 12


@dataclass
class SuiteReport:
    items: dict = field(default_factory=dict)  # item -> bool
    witnesses: dict = field(default_factory=dict)  # item -> witness of failure
    exact_vanishing: dict = field(default_factory=dict)  # subgroup id -> bool
    failed_item: "int | None" = None

    @property
    def ok(self) -> bool:
        return self.failed_item is None and all(self.items.values())


def property_suite(family: Sequence[FamilyMember], subgroups: Sequence[SubgroupAutomaton],
                   radii: SuiteRadii = SuiteRadii(), W: int = 1) -> SuiteReport:
    """Items (1)-(5) on the family; stops at the first failure.

    (1) ``h_i(f_j^m) = 0`` for ``i != j``; (2) ``h_i(f_i^{r_i m}) = W m``;
    (3) zero exponent sums; (4) lengths strictly increasing; (5) ``h_i``
    vanishes on each subgroup, on a ball and exactly via factor freeness.
    """
    _require_unit_weight(W)
    rep = SuiteReport()
    specs = [member_spec(x, W) for x in family]

    def fail(item: int, witness) -> SuiteReport:
        rep.items[item] = False
        rep.witnesses[item] = witness
        rep.failed_item = item
        return rep

    for i, si in enumerate(specs):
        for j, xj in enumerate(family):
            if i == j:
                continue
            for m in range(1, radii.powers + 1):
                v = h_value(si, xj.f ** m)
                if v:
                    return fail(1, {"i": i + 1, "j": j + 1, "m": m, "value": v})
    rep.items[1] = True

    for i, (si, xi) in enumerate(zip(specs, family)):
        for m in range(1, radii.powers + 1):
            v = h_value(si, xi.power(m))
            if v != W * m:
                return fail(2, {"i": i + 1, "m": m, "value": v})
    rep.items[2] = True

    for xi in family:
        if any(exponent_sums(xi.f)):
            return fail(3, {"i": xi.index, "sums": exponent_sums(xi.f)})
    rep.items[3] = True

    for a, b in zip(family, family[1:]):
        if len(b.f) <= len(a.f):
            return fail(4, {"i": b.index, "lengths": (len(a.f), len(b.f))})
    rep.items[4] = True

    for k, H in enumerate(subgroups):
        exact = True
        for si, xi in zip(specs, family):
            chk = vanishing_check(si, H, radii.subgroup, protection=xi.protection)
            if chk.witness is not None:
                return fail(5, {"subgroup": k, "i": xi.index, "h": chk.witness[0], "value": chk.witness[1]})
            exact = exact and chk.exact
        rep.exact_vanishing[k] = exact
    rep.items[5] = True
    return rep


@dataclass(frozen=True)
class VanishingReport:
    exact: bool  # vanishing on all of H, certified by factor freeness
    ball_radius: int
    n_checked: int
    witness: "tuple | None" = None  # (h, value) with a nonzero value
    route: str = ""


def vanishing_check(spec: QmSpec, H: SubgroupAutomaton, radius: int,
                    protection: "Word | None" = None) -> VanishingReport:
    """Whether ``h`` vanishes on ``H``: ball enumeration plus an exact certificate.

    The certificate holds when ``H`` is factor free for the pattern itself
    or for a protection word that is a factor of the pattern.
    """
    hs = enumerate_subgroup(H, radius)
    witness = None
    for h in hs:
        v = h_value(spec, h)
        if v:
            witness = (h.text, v)
            break
    route = ""
    if protection is not None and has_barrier(spec.w, protection) and factor_free(H, protection):
        route = "protection"
    elif factor_free(H, spec.w):
        route = "pattern"
    return VanishingReport(bool(route), radius, len(hs), witness, route)


@dataclass(frozen=True)
class IndependenceCertificate:
    N: int
    m: int
    matrix: np.ndarray
    diagonal_slope: int
    vanishing: dict = field(default_factory=dict)

    @property
    def off_diagonal_zero(self) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return not off.any()

    @property
    def degenerate(self) -> bool:
        return self.m == 0

    @property
    def ok(self) -> bool:
        diag = np.diag(self.matrix)
        return (not self.degenerate and self.off_diagonal_zero
                and bool(np.all(diag >= self.diagonal_slope * self.m)))


def independence_matrix(family: Sequence[FamilyMember], m: int, vanishing: "dict | None" = None,
                        W: int = 1) -> IndependenceCertificate:
    """``M_ij = h_i(f_j^{r_j m})``; diagonal ``W m`` and zero elsewhere certifies independence."""
    _require_unit_weight(W)
    if m < 0:
        raise ValueError("m must be non-negative")
    n = len(family)
    M = np.zeros((n, n), dtype=np.int64)
    powers = [x.power(m).text for x in family]
    for i, x in enumerate(family):
        w, wi = x.power(1).text, x.power(-1).text
        for j in range(n):
            M[i, j] = W * (count_copies(powers[j], w) - count_copies(powers[j], wi))
    return IndependenceCertificate(n, m, M, W, dict(vanishing or {}))


@dataclass(frozen=True)
class BoundedGenerationReport:
    N: int
    slope: Fraction  # homogenized value on f_i^{r_i}
    empirical_defect: int
    m_star: "int | None"
    max_product: Fraction  # max |phi-bar| over sampled products
    n_products: int
    witness: "str | None" = None  # product realizing max_product

    @property
    def bound(self) -> int:
        return self.N * self.empirical_defect

    @property
    def ok(self) -> bool:
        return self.m_star is not None and self.max_product <= self.bound


def bounded_generation_report(member: FamilyMember, subgroups: Sequence[SubgroupAutomaton], N: int,
                              radius: int, defect_radius: int = 3, samples: int = 2000,
                              seed: int = 0, W: int = 1) -> BoundedGenerationReport:
    """Obstruction to writing every power of ``f_i^{r_i}`` as ``N`` conjugates from the ``H_j``.

    Single conjugates ``t h t^-1`` with ``|t|, |h| <= radius`` are scanned
    exhaustively; products of ``2..N`` of them are sampled with a seeded
    generator.  ``m*`` is the least power with ``m* slope > N defect``.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    for H in subgroups:
        rep = index_and_gauge(H)
        if rep.finite:
            raise FiniteIndexError(f"{FINITE_INDEX_MESSAGE} (index {rep.index})")
    _require_unit_weight(W)
    spec = member_spec(member, W)
    f = member.power(1)
    slope = stable_value(spec, f)
    probe = defect_probe(spec, [f, f ** 2, f.inverse() * f ** 2])
    defect = max(defect_scan(spec, defect_radius).empirical_defect, probe)
    m_star = None
    if slope > 0:
        m_star = int(N * defect // slope) + 1
    if N == 0:
        return BoundedGenerationReport(N, slope, defect, m_star, Fraction(0), 1, "")
    conj: dict[str, Word] = {}
    ts = ball(radius, f.rank)
    for H in subgroups:
        for h in enumerate_subgroup(H, radius):
            for t in ts:
                c = t * h * t.inverse()
                conj.setdefault(c.text, c)
    pool = list(conj.values())
    best, witness, count = Fraction(0), "", 0
    for c in pool:
        v = abs(stable_value(spec, c))
        count += 1
        if v > best:
            best, witness = v, c.text
    rng = np.random.default_rng(seed)
    for k in range(2, N + 1):
        for _ in range(samples):
            idx = rng.integers(0, len(pool), size=k)
            x = Word("", f.rank)
            for q in idx:
                x = x * pool[q]
            v = abs(stable_value(spec, x))
            count += 1
            if v > best:
                best, witness = v, x.text
    return BoundedGenerationReport(N, slope, defect, m_star, best, count, witness)
