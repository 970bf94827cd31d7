"""Projection complex over the translates of an axis in the Cayley tree.

Projections between lines of a tree are exact: the closest-point
projection of one line onto another is a single vertex when the lines
are disjoint and their overlap segment otherwise.  Every projection is
stored as an interval of signed positions along the target line.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .freeword import Axis, Word, ball, project_point_to_axis, tree_distance
from .stallings import SubgroupAutomaton, enumerate_subgroup

__all__ = [
    "ProjFamily", "ProjConfig", "IntervalResult", "AxiomReport", "PKBall", "EllipticReport",
    "WpdReport", "StandardPath", "project_axis_to_axis", "projection_interval", "d_U",
    "check_axioms", "triangle_violations", "interval", "lines_through", "pk_ball",
    "bottleneck_constant", "elliptic_check", "wpd_count", "lift_standard_path",
    "stabilizer_oracle", "graph_to_json",
]


@dataclass(frozen=True)
class ProjFamily:
    """A finite set of translates ``b * base_axis``, deduplicated as lines."""

    base_axis: Axis
    members: tuple
    generator_ball_radius: "int | None" = None

    @classmethod
    def from_ball(cls, base: Axis, radius: int) -> "ProjFamily":
        seen: dict[Axis, None] = {}
        for b in ball(radius, base.rep.rank):
            seen.setdefault(base.translate(b), None)
        return cls(base, tuple(seen), radius)

    @classmethod
    def from_members(cls, base: Axis, members: Iterable[Axis]) -> "ProjFamily":
        """Explicit member list; every member must be a translate of ``base``."""
        out: dict[Axis, None] = {}
        for m in members:
            if m.root != base.root:
                raise ValueError(f"{m.label()} is not a translate of {base.label()}")
            out.setdefault(m, None)
        return cls(base, tuple(out), None)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, axis: Axis) -> bool:
        return axis in self.members

    def index(self, axis: Axis) -> int:
        return self.members.index(axis)


@dataclass(frozen=True)
class ProjConfig:
    kappa: int
    K: int

    def __post_init__(self) -> None:
        if self.kappa < 0 or self.K <= 0:
            raise ValueError("need kappa >= 0 and K > 0")
        if self.K <= self.kappa:
            raise ValueError(f"K={self.K} must exceed kappa={self.kappa}")


@lru_cache(maxsize=1 << 18)
def projection_interval(U: Axis, V: Axis) -> tuple[int, int]:
    """Positions ``(lo, hi)`` on ``U`` spanned by the projection of ``V``.

    The extreme vertices of a symmetric stretch of ``V`` are projected and
    the stretch doubled until the interval is unchanged three times.
    """
    if U == V:
        raise ValueError("cannot project a line onto itself")
    per = V.period
    n = 1
    history: list[tuple[int, int]] = []
    while True:
        ts = []
        for x in (V.point(-n * per), V.point(n * per)):
            p, _ = project_point_to_axis(x, U)
            t = U.position(p)
            assert t is not None
            ts.append(t)
        history.append((min(ts), max(ts)))
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            return history[-1]
        if n > 1 << 30:
            raise RuntimeError("axis projection did not stabilize")
        n *= 2


def project_axis_to_axis(U: Axis, V: Axis) -> set[Word]:
    """Vertices of ``U`` closest to the line ``V``."""
    lo, hi = projection_interval(U, V)
    return {U.point(t) for t in range(lo, hi + 1)}


def d_U(U: Axis, V: Axis, W: Axis) -> int:
    """``diam(pi_U(V) u pi_U(W))``."""
    if U == V or U == W:
        raise ValueError("U must differ from V and W")
    a, b = projection_interval(U, V)
    c, d = projection_interval(U, W)
    return max(b, d) - min(a, c)


def _pair_tables(members: Sequence[Axis]) -> tuple[np.ndarray, np.ndarray]:
    n = len(members)
    lo = np.zeros((n, n), dtype=np.int64)
    hi = np.zeros((n, n), dtype=np.int64)
    for i, U in enumerate(members):
        for j, V in enumerate(members):
            if i != j:
                lo[i, j], hi[i, j] = projection_interval(U, V)
    return lo, hi


def _d_tensor(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # D[u, v, w] = d_u(v, w); entries with u in {v, w} are meaningless
    return np.maximum(hi[:, :, None], hi[:, None, :]) - np.minimum(lo[:, :, None], lo[:, None, :])


@dataclass(frozen=True)
class AxiomReport:
    kappa_min: int
    kappa_projection: int  # max diam pi_U(V)
    kappa_pairing: int  # max over triples of min(d_V(U,W), d_U(V,W))
    checked_kappa: int
    violations: tuple = ()  # (axiom, labels...) at checked_kappa
    interval_sizes_max: int = 0  # largest |{U : d_U(V,W) > kappa}|, axiom (3)
    n_members: int = 0


def check_axioms(F: ProjFamily, kappa: "int | None" = None) -> AxiomReport:
    """Least ``kappa`` for which the three projection axioms hold on ``F``.

    Violations are listed for ``kappa`` when given (by construction there
    are none at the minimum).
    """
    n = len(F.members)
    if n < 3:
        raise ValueError("need at least three members")
    lo, hi = _pair_tables(F.members)
    diam = hi - lo
    D = _d_tensor(lo, hi)
    idx = np.arange(n)
    distinct = ((idx[:, None, None] != idx[None, :, None])
                & (idx[:, None, None] != idx[None, None, :])
                & (idx[None, :, None] != idx[None, None, :]))
    # pair[u, v, w] = min(d_v(u, w), d_u(v, w))
    pair = np.minimum(D.transpose(1, 0, 2), D)
    k1 = int(diam.max())
    k2 = int(pair[distinct].max())
    kmin = max(k1, k2)
    k = kmin if kappa is None else kappa
    labels = [m.label() for m in F.members]
    viol = []
    for i, j in zip(*np.nonzero(diam > k)):
        viol.append(("projection", labels[i], labels[j], int(diam[i, j])))
    for u, v, w in zip(*np.nonzero((pair > k) & distinct)):
        if v < w:
            viol.append(("pairing", labels[u], labels[v], labels[w]))
    big = (D > k) & distinct
    sizes = big.sum(axis=0)
    return AxiomReport(kmin, k1, k2, k, tuple(viol), int(sizes.max()), n)


def triangle_violations(F: ProjFamily) -> list[tuple[str, str, str, str]]:
    """Quadruples with ``d_Y(V,W) > d_Y(V,U) + d_Y(U,W)``."""
    lo, hi = _pair_tables(F.members)
    D = _d_tensor(lo, hi)
    n = len(F.members)
    out = []
    for y in range(n):
        Dy = D[y]
        bad = Dy[:, None, :] > Dy[:, :, None] + Dy[None, :, :]  # [v, u, w]
        bad[[y], :, :] = False
        bad[:, [y], :] = False
        bad[:, :, [y]] = False
        for v, u, w in zip(*np.nonzero(bad)):
            out.append(tuple(F.members[k].label() for k in (y, v, u, w)))
    return out


def lines_through(x: Word, base: Axis) -> list[Axis]:
    """Every translate of ``base`` whose vertex set contains ``x``."""
    r = base.root
    out: dict[Axis, None] = {}
    for j in range(len(r)):
        out.setdefault(Axis.through(x * r._new(r.text[:j]).inverse(), r), None)
    return list(out)


@dataclass(frozen=True)
class IntervalResult:
    V: Axis
    W: Axis
    members: tuple  # open interval, ordered from V to W
    projections: dict = field(default_factory=dict, repr=False)  # U -> d_U(V, W)
    D: int = 0  # measured order-consistency constant
    order_violations: tuple = ()

    @property
    def chain(self) -> tuple:
        """``V``, the ordered members, then ``W``."""
        return (self.V,) + self.members + (self.W,)

    @property
    def empty(self) -> bool:
        return not self.members


def _bridge_hull(V: Axis, W: Axis) -> list[Word]:
    a, b = projection_interval(V, W)
    c, d = projection_interval(W, V)
    ends = [V.point(a), V.point(b), W.point(c), W.point(d)]
    seen: dict[str, Word] = {}
    for x, y in combinations(ends, 2):
        m = x.inverse() * y
        for i in range(len(m) + 1):
            v = x * m._new(m.text[:i])
            seen.setdefault(v.text, v)
    return list(seen.values())


def _footprint(U: Axis, V: Axis, W: Axis) -> tuple[Word, Word]:
    a, b = projection_interval(U, V)
    c, d = projection_interval(U, W)
    if c >= b:
        return U.point(b), U.point(c)
    if d <= a:
        return U.point(a), U.point(d)
    t = max(a, c)
    return U.point(t), U.point(t)


def interval(V: Axis, W: Axis, F: ProjFamily, cfg: ProjConfig, exact: bool = True) -> IntervalResult:
    """Members ``U`` with ``d_U(V,W) > K``, in order from ``V`` to ``W``.

    With ``exact`` the translates through the hull of the bridge between
    ``V`` and ``W`` are added to the candidates, which makes the answer
    independent of the finite truncation of the family.
    """
    if V == W:
        raise ValueError("interval needs two distinct axes")
    cands: dict[Axis, None] = dict.fromkeys(F.members)
    if exact:
        for x in _bridge_hull(V, W):
            for L in lines_through(x, F.base_axis):
                cands.setdefault(L, None)
    cands.pop(V, None)
    cands.pop(W, None)
    proj = {}
    for U in cands:
        d = d_U(U, V, W)
        if d > cfg.K:
            proj[U] = d
    a, b = projection_interval(V, W)
    s = V.point(a)
    def key(U: Axis) -> tuple:
        f, g = _footprint(U, V, W)
        return (tree_distance(s, f), tree_distance(s, g), U.label())
    ordered = tuple(sorted(proj, key=key))
    D, bad = _order_check((V,) + ordered + (W,), proj)
    return IntervalResult(V, W, ordered, proj, D, bad)


def _order_check(chain: Sequence[Axis], proj: dict) -> tuple[int, tuple]:
    D = 0
    bad = []
    for i, j, k in combinations(range(len(chain)), 3):
        A, B, C = chain[i], chain[j], chain[k]
        mid = d_U(B, A, C)
        D = max(D, d_U(A, B, C), d_U(C, A, B), proj[B] - mid)
        if mid > proj[B]:
            bad.append((A.label(), B.label(), C.label()))
    return D, tuple(bad)


@dataclass
class PKBall:
    center: Axis
    graph: nx.Graph

    def d_P(self, U: Axis, V: Axis) -> int:
        return nx.shortest_path_length(self.graph, U, V)

    def to_json(self) -> dict:
        return graph_to_json(self.graph)


def graph_to_json(graph: nx.Graph) -> dict:
    nodes = list(graph.nodes)
    pos = {v: i for i, v in enumerate(nodes)}
    name = lambda v: v.label() if isinstance(v, Axis) else str(v)
    edges = sorted(sorted((pos[a], pos[b])) for a, b in graph.edges)
    return {"vertices": [name(v) for v in nodes], "edges": [list(e) for e in edges]}


def pk_ball(center: Axis, hops: int, F: ProjFamily, cfg: ProjConfig) -> PKBall:
    """Members of ``F`` within ``hops`` edges of ``center`` in ``P_K``.

    Two members are adjacent when their open ``K``-interval is empty.
    """
    if center not in F:
        raise ValueError("center must be a member of the family")
    adj: dict[Axis, list[Axis]] = {}

    def neighbours(U: Axis) -> list[Axis]:
        if U not in adj:
            adj[U] = [X for X in F.members if X != U and interval(U, X, F, cfg).empty]
        return adj[U]

    depth = {center: 0}
    queue = deque([center])
    while queue:
        U = queue.popleft()
        if depth[U] == hops:
            continue
        for X in neighbours(U):
            if X not in depth:
                depth[X] = depth[U] + 1
                queue.append(X)
    G = nx.Graph()
    G.add_nodes_from(depth)
    for U in depth:
        for X in neighbours(U):
            if X in depth:
                G.add_edge(U, X)
    return PKBall(center, G)


def bottleneck_constant(graph: nx.Graph) -> tuple[int, "tuple | None"]:
    """Least ``delta`` with a midpoint ball separating every pair.

    For each pair ``(x, y)`` some midpoint ``z`` of a geodesic must satisfy
    either ``x, y`` both in ``B(z, delta)`` or both outside it and in
    different components once the ball is deleted.  Returns ``delta`` and
    the pair forcing it.
    """
    if graph.number_of_nodes() == 0:
        return 0, None
    if not nx.is_connected(graph):
        raise ValueError("graph must be connected")
    dist = dict(nx.all_pairs_shortest_path_length(graph))
    nodes = list(graph.nodes)
    best, witness = 0, None

    def separated(x, y, z, delta) -> bool:
        inside = {v for v, d in dist[z].items() if d <= delta}
        if x in inside and y in inside:
            return True
        if x in inside or y in inside:
            return False
        rest = graph.subgraph(v for v in nodes if v not in inside)
        return not nx.has_path(rest, x, y)

    for i, x in enumerate(nodes):
        for y in nodes[i + 1:]:
            d = dist[x][y]
            h = d // 2
            mids = [z for z in nodes if dist[x][z] == h and dist[z][y] == d - h]
            need = None
            for delta in range(d + 1):
                if any(separated(x, y, z, delta) for z in mids):
                    need = delta
                    break
            if need is None:
                raise AssertionError("a ball of radius d always contains both points")
            if need > best or witness is None:
                best, witness = need, (x, y)
    return best, witness


@dataclass(frozen=True)
class EllipticReport:
    ok: bool
    max_d_P: int  # 0, 1, or 2 meaning "at least 2"
    failures: tuple = ()  # subgroup elements h with a nonempty interval
    n_checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def elliptic_check(H: SubgroupAutomaton, U: Axis, F: ProjFamily, cfg: ProjConfig, radius: int,
                   stop_early: bool = False) -> EllipticReport:
    """Whether ``d_P(U, hU) <= 1`` for every ``h`` in ``H`` up to ``radius``."""
    worst = 0
    bad = []
    hs = enumerate_subgroup(H, radius)
    for h in hs:
        hU = U.translate(h)
        if hU == U:
            continue
        if interval(U, hU, F, cfg).empty:
            worst = max(worst, 1)
        else:
            worst = 2
            bad.append(h.text)
            if stop_early:
                break
    return EllipticReport(not bad, worst, tuple(bad), len(hs))


@dataclass(frozen=True)
class WpdReport:
    count: int
    elements: tuple


def wpd_count(x: Word, y: Word, L: int, R: int) -> WpdReport:
    """Elements ``h`` with ``|h| <= R`` moving both ``x`` and ``y`` by at most ``L``."""
    if R < L:
        raise ValueError("need R >= L")
    hits = [h for h in ball(R, x.rank)
            if tree_distance(x, h * x) <= L and tree_distance(y, h * y) <= L]
    return WpdReport(len(hits), tuple(h.text for h in hits))


@dataclass(frozen=True)
class StandardPath:
    waypoints: tuple  # vertices where the path switches between axis and bridge legs
    kinds: tuple  # "axis" or "bridge" per leg
    length: int
    tree_distance: int
    members: tuple = ()


def lift_standard_path(u: Word, U: Axis, v: Word, V: Axis, F: ProjFamily, cfg: ProjConfig) -> StandardPath:
    """Path from ``u`` to ``v`` running along the interval members in order.

    Inside each member it follows the line to the projection of the next
    member, then crosses the bridge to the next member.
    """
    if not U.contains(u):
        raise ValueError(f"{u.text!r} is not a vertex of {U.label()}")
    if not V.contains(v):
        raise ValueError(f"{v.text!r} is not a vertex of {V.label()}")
    if u == v:
        return StandardPath((u,), (), 0, 0, (U,))
    if U == V:
        d = tree_distance(u, v)
        return StandardPath((u, v), ("axis",), d, d, (U,))
    chain = interval(U, V, F, cfg).chain
    pts = [u]
    kinds = []
    cur = u
    for X, Y in zip(chain, chain[1:]):
        lo, hi = projection_interval(X, Y)
        exit_ = min((X.point(t) for t in range(lo, hi + 1)), key=lambda p: tree_distance(cur, p))
        if exit_ != cur:
            pts.append(exit_)
            kinds.append("axis")
        entry, _ = project_point_to_axis(exit_, Y)
        if entry != exit_:
            pts.append(entry)
            kinds.append("bridge")
        cur = entry
    if v != cur:
        pts.append(v)
        kinds.append("axis")
    length = sum(tree_distance(a, b) for a, b in zip(pts, pts[1:]))
    return StandardPath(tuple(pts), tuple(kinds), length, tree_distance(u, v), chain)


def stabilizer_oracle(axis: Axis, radius: int) -> list[Word]:
    """Elements of the ball of ``radius`` mapping ``axis`` onto itself."""
    return [b for b in ball(radius, axis.rep.rank) if axis.translate(b) == axis]
