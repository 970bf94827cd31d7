"""Barriers along geodesics, the choice of g0, and bounded projection scans."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

from .freeword import (Axis, Word, _median_text, axis_of, ball, is_cyclically_reduced,
                       iter_shortlex, project_point_to_axis, tree_distance)
from .stallings import (SubgroupAutomaton, double_coset_member, enumerate_subgroup,
                        factor_free, index_and_gauge)

__all__ = [
    "BarrierParams", "G0Certificate", "FiniteIndexError", "has_barrier", "has_barrier_oracle",
    "find_g0", "extend_to_contracting", "bounded_projection_scan", "ProjectionScan",
    "barrier_implication_test", "ImplicationReport", "projection_diameter",
    "DEFAULT_SPACERS", "FINITE_INDEX_MESSAGE",
]

DEFAULT_SPACERS = ("ab", "ba", "aab", "abb")

FINITE_INDEX_MESSAGE = (
    "subgroup has finite index: H^2_b(G,H;R) = 0, so there is no nontrivial relative class to certify"
)


class FiniteIndexError(ValueError):
    """Raised when a subgroup of finite index is supplied to the pipeline."""


@dataclass(frozen=True)
class BarrierParams:
    epsilon: int = 0

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")


@dataclass(frozen=True)
class G0Certificate:
    g0: Word
    S_radius: int
    subgroups: tuple
    exact_all_H: bool
    per_subgroup: tuple = ()  # factor_free flag per subgroup


def has_barrier(g: Word, f: Word, p: BarrierParams = BarrierParams()) -> bool:
    """Whether the geodesic ``[o, g.o]`` contains an ``(epsilon, f)``-barrier.

    At ``epsilon = 0`` this is factor containment of ``f`` or ``f^-1`` in
    ``g``; otherwise the translates ``t`` with ``t.o`` near the geodesic are
    enumerated.
    """
    if not f:
        raise ValueError("barrier word must be nontrivial")
    if p.epsilon == 0:
        return f.text in g.text or f.inverse().text in g.text
    return has_barrier_oracle(g, f, p.epsilon)


def has_barrier_oracle(g: Word, f: Word, epsilon: int) -> bool:
    """Enumerate every ``t`` with ``d(t.o, [o, g.o]) <= epsilon``."""
    near = ball(epsilon, g.rank)
    seen = set()
    for i in range(len(g) + 1):
        x = g._new(g.text[:i])
        for s in near:
            t = x * s
            if t.text in seen:
                continue
            seen.add(t.text)
            if _dist_geo(t.text, g.text) > epsilon:
                continue
            if _dist_geo((t * f).text, g.text) <= epsilon:
                return True
    return False


def _dist_geo(y: str, g: str) -> int:
    return len(y) - len(_median_text("", y, g))


def find_g0(subgroups: Sequence[SubgroupAutomaton], p: BarrierParams = BarrierParams(),
            max_length: int = 12) -> G0Certificate:
    """Shortlex-least ``g0`` outside ``S H_i S`` for every ``i``.

    ``S`` is the ball of radius ``epsilon + max M_i`` with ``M_i`` the Morse
    gauge of ``H_i``.  Every element of every ``H_i`` is then
    ``(epsilon, g0)``-barrier-free.
    """
    if not subgroups:
        raise ValueError("need at least one subgroup")
    rank = subgroups[0].rank
    gauges = []
    for H in subgroups:
        rep = index_and_gauge(H)
        if rep.finite:
            raise FiniteIndexError(f"{FINITE_INDEX_MESSAGE} (index {rep.index})")
        gauges.append(rep.morse_gauge)
    s_radius = p.epsilon + max(gauges)
    S = ball(s_radius, rank)
    for g0 in iter_shortlex(rank, start=1):
        if len(g0) > max_length:
            break
        if any(double_coset_member(g0, S, H) for H in subgroups):
            continue
        flags = tuple(factor_free(H, g0) for H in subgroups) if p.epsilon == 0 else ()
        exact = bool(flags) and all(flags)
        return G0Certificate(g0, s_radius, tuple(range(len(subgroups))), exact, flags)
    raise RuntimeError(f"no g0 of length <= {max_length}")


def extend_to_contracting(g0: Word, spacers: Sequence["Word | str"] = DEFAULT_SPACERS) -> Word:
    """``g0 * f`` for the first spacer ``f`` giving a cyclically reduced word with no cancellation."""
    if not g0:
        raise ValueError("g0 must be nontrivial")
    for f in spacers:
        f = g0._new(f) if isinstance(f, str) else f
        if not f:
            raise ValueError("spacers must be nontrivial")
        g = g0 * f
        if len(g) == len(g0) + len(f) and is_cyclically_reduced(g):
            return g
    raise ValueError(f"no spacer extends {g0.text!r} without cancellation")


def projection_diameter(x: Word, y: Word, axis: Axis) -> int:
    """Diameter of the projection of the geodesic ``[x, y]`` onto ``axis``.

    Every vertex of the geodesic is projected.
    """
    m = x.inverse() * y
    pts = []
    for i in range(len(m) + 1):
        v = x * m._new(m.text[:i])
        pts.append(project_point_to_axis(v, axis)[0])
    # projected points lie on a line: the extreme pair realizes the diameter
    a = pts[0]
    far = max(pts, key=lambda q: tree_distance(a, q))
    return max(tree_distance(far, q) for q in pts)


@dataclass(frozen=True)
class ProjectionScan:
    tau_obs: int
    rows: tuple = field(default=(), repr=False)  # (h, b, diameter)
    witness: "tuple | None" = None

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["h", "b", "projection_diameter"])
            out.writerows(self.rows)


def bounded_projection_scan(g: Word, subgroups: Sequence[SubgroupAutomaton], radius: int) -> ProjectionScan:
    """``max diam pi_{b Ax(g)}([o, h.o])`` over ``h`` in the ``H_i`` and ``|b| <= radius``."""
    if not g or not is_cyclically_reduced(g):
        raise ValueError("g must be nontrivial and cyclically reduced")
    base = axis_of(g)
    axes: dict[Axis, str] = {}
    for b in ball(radius, g.rank):
        axes.setdefault(base.translate(b), b.text)
    hs: dict[str, Word] = {}
    for H in subgroups:
        for h in enumerate_subgroup(H, radius):
            hs.setdefault(h.text, h)
    o = g._new("")
    rows = []
    best, witness = 0, None
    for ht, h in hs.items():
        for ax, bt in axes.items():
            d = projection_diameter(o, h, ax)
            rows.append((ht, bt, d))
            if d > best:
                best, witness = d, (ht, bt)
    return ProjectionScan(best, tuple(rows), witness)


@dataclass(frozen=True)
class ImplicationReport:
    tau: int
    witness: "tuple | None"
    bound: int
    violation: bool


def barrier_implication_test(g: Word, g0: Word, p: BarrierParams = BarrierParams(),
                             radius: int = 4) -> ImplicationReport:
    """Least ``tau`` such that every geodesic in the ball projecting to ``Ax(g)``
    with diameter above ``tau`` contains an ``(epsilon, g0)``-barrier.

    When ``g0`` is a factor of the cyclic word ``g``, any stretch of the
    axis of length ``|g| + |g0| - 1`` spells ``g0^{+-1}``, so ``tau`` can never
    exceed ``|g| + |g0| - 2``; a larger value is flagged as a violation.
    """
    bound = len(g) + len(g0) - 2
    if radius == 0:
        return ImplicationReport(0, None, bound, False)
    axis = axis_of(g)
    pts = ball(radius, g.rank)
    proj = {x.text: project_point_to_axis(x, axis)[0] for x in pts}
    tau, witness = 0, None
    for x in pts:
        for y in pts:
            if has_barrier(x.inverse() * y, g0, p):
                continue
            # projection of a tree geodesic onto a line is the segment between endpoint projections
            d = tree_distance(proj[x.text], proj[y.text])
            if d > tau:
                tau, witness = d, (x.text, y.text)
    return ImplicationReport(tau, witness, bound, tau > bound)
