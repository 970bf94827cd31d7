"""Finitely generated subgroups of F_n as folded Stallings automata."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .freeword import Word, letter_order, parse, shortlex_key, tree_distance

__all__ = [
    "SubgroupAutomaton", "IndexReport", "build", "membership", "index_and_gauge",
    "enumerate_subgroup", "orbit_distance", "double_coset_member", "factor_free",
    "factor_free_oracle", "orbit_distance_oracle",
]


@dataclass(frozen=True)
class IndexReport:
    index: "int | str"  # positive integer or "infinite"
    morse_gauge: int

    @property
    def finite(self) -> bool:
        return self.index != "infinite"


@dataclass(frozen=True, eq=False)
class SubgroupAutomaton:
    """Folded core graph of a subgroup, vertices numbered by BFS from the base (0).

    ``edges`` maps ``(vertex, letter)`` to a vertex and is closed under
    inverses: an ``x`` edge from ``v`` to ``w`` comes with an ``X`` edge
    from ``w`` to ``v``.
    """

    rank: int
    n_vertices: int
    edges: dict = field(repr=False)
    generators: tuple = ()
    base: int = 0

    def step(self, v: int, c: str) -> "int | None":
        return self.edges.get((v, c))

    def trace(self, text: str, start: int = 0) -> "int | None":
        v = start
        for c in text:
            v = self.edges.get((v, c))
            if v is None:
                return None
        return v

    def out_letters(self, v: int) -> list[str]:
        return [c for c in letter_order(self.rank) if (v, c) in self.edges]

    @property
    def n_edges(self) -> int:
        """Number of geometric (undirected) edges."""
        return len(self.edges) // 2

    @property
    def graph_rank(self) -> int:
        return 1 - self.n_vertices + self.n_edges

    def distances(self) -> list[int]:
        dist = [-1] * self.n_vertices
        dist[self.base] = 0
        queue = deque([self.base])
        while queue:
            v = queue.popleft()
            for c in letter_order(self.rank):
                w = self.edges.get((v, c))
                if w is not None and dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    def diameter(self) -> int:
        best = 0
        for s in range(self.n_vertices):
            dist = {s: 0}
            queue = deque([s])
            while queue:
                v = queue.popleft()
                for c in self.out_letters(v):
                    w = self.edges[(v, c)]
                    if w not in dist:
                        dist[w] = dist[v] + 1
                        queue.append(w)
            best = max(best, max(dist.values()))
        return best

    def to_json(self) -> dict:
        rows = [
            {"from": v, "letter": c, "to": w}
            for (v, c), w in sorted(self.edges.items(), key=lambda kv: (kv[0][0], shortlex_key(kv[0][1])))
            if c.islower()
        ]
        return {"rank": self.rank, "base": self.base, "edges": rows,
                "generators": [g.text for g in self.generators]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: "dict | str") -> "SubgroupAutomaton":
        if isinstance(data, str):
            data = json.loads(data)
        rank = int(data["rank"])
        edges: dict = {}
        verts = {int(data.get("base", 0))}
        for row in data["edges"]:
            v, c, w = int(row["from"]), row["letter"], int(row["to"])
            edges[(v, c)] = w
            edges[(w, c.swapcase())] = v
            verts.update((v, w))
        gens = tuple(parse(t, rank) for t in data.get("generators", ()))
        return cls(rank, len(verts), edges, gens, int(data.get("base", 0)))


def build(generators: Sequence[Word], rank: "int | None" = None) -> SubgroupAutomaton:
    """Fold the bouquet of generator loops into a core Stallings graph."""
    gens = [g for g in generators]
    if rank is None:
        rank = gens[0].rank if gens else 2
    for g in gens:
        if g.rank != rank:
            raise ValueError("generators must share one rank")

    # edges as adjacency: vertex -> {letter: set(vertices)}
    adj: dict[int, dict[str, set[int]]] = {0: {}}
    nxt = 1

    def add_edge(v: int, c: str, w: int) -> None:
        adj.setdefault(v, {}).setdefault(c, set()).add(w)
        adj.setdefault(w, {}).setdefault(c.swapcase(), set()).add(v)

    for g in gens:
        if not g:
            continue
        v = 0
        for i, c in enumerate(g.text):
            if i == len(g.text) - 1:
                w = 0
            else:
                w = nxt
                adj[w] = {}
                nxt += 1
            add_edge(v, c, w)
            v = w

    # fold with union-find style merging
    parent = {v: v for v in adj}

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    changed = True
    while changed:
        changed = False
        for v in list(adj):
            if find(v) != v:
                continue
            for c in list(adj[v]):
                targets = {find(w) for w in adj[v][c]}
                if len(targets) > 1:
                    keep, *rest = sorted(targets)
                    for r in rest:
                        parent[r] = keep
                        for c2, ws in adj.pop(r, {}).items():
                            for w in ws:
                                adj[keep].setdefault(c2, set()).add(w)
                    changed = True
                    break
                adj[v][c] = targets
            if changed:
                break
        if changed:
            # renormalize every entry to representatives
            for v in list(adj):
                for c in adj[v]:
                    adj[v][c] = {find(w) for w in adj[v][c]}

    edges = {(v, c): next(iter(ws)) for v in adj for c, ws in adj[v].items() if ws}

    # core trimming: drop degree-1 vertices other than the base
    alive = set(adj)
    while True:
        deg = {v: 0 for v in alive}
        for (v, c), w in edges.items():
            if v in alive and w in alive:
                deg[v] += 1
        leaves = [v for v in alive if v != 0 and deg[v] <= 1]
        if not leaves:
            break
        alive -= set(leaves)
    edges = {(v, c): w for (v, c), w in edges.items() if v in alive and w in alive}

    # BFS renumbering from the base, letters in shortlex order
    order = {0: 0}
    queue = deque([0])
    letters = letter_order(rank)
    while queue:
        v = queue.popleft()
        for c in letters:
            w = edges.get((v, c))
            if w is not None and w not in order:
                order[w] = len(order)
                queue.append(w)
    edges = {(order[v], c): order[w] for (v, c), w in edges.items()}
    return SubgroupAutomaton(rank, len(order), edges, tuple(gens))


def membership(H: SubgroupAutomaton, g: Word) -> bool:
    if g.rank != H.rank:
        raise ValueError(f"rank mismatch: {g.rank} vs {H.rank}")
    return H.trace(g.text) == H.base


def index_and_gauge(H: SubgroupAutomaton) -> IndexReport:
    """Index of ``H`` (finite iff the core graph is complete) and ``M = eta(1)``.

    ``M`` is the largest graph distance from the base; every vertex of a
    geodesic between two orbit points lies within ``M`` of the orbit.
    """
    complete = all(len(H.out_letters(v)) == 2 * H.rank for v in range(H.n_vertices))
    gauge = max(H.distances())
    return IndexReport(H.n_vertices if complete else "infinite", gauge)


def enumerate_subgroup(H: SubgroupAutomaton, radius: int) -> list[Word]:
    """All elements of ``H`` of length at most ``radius``, shortlex sorted."""
    proto = Word("", H.rank)
    found = [""]
    letters = letter_order(H.rank)
    stack = [("", H.base)]
    while stack:
        text, v = stack.pop()
        if len(text) == radius:
            continue
        for c in letters:
            if text and text[-1] == c.swapcase():
                continue
            w = H.edges.get((v, c))
            if w is None:
                continue
            t = text + c
            if w == H.base:
                found.append(t)
            stack.append((t, w))
    found.sort(key=shortlex_key)
    return [proto._new(t) for t in found]


def orbit_distance(H: SubgroupAutomaton, x: Word) -> int:
    """Distance from the vertex ``x`` to the orbit ``H.o`` in the Cayley tree."""
    dist = H.distances()
    best = None
    v = H.base
    for i in range(len(x) + 1):
        d = len(x) - i + dist[v]
        best = d if best is None else min(best, d)
        if i == len(x):
            break
        v = H.edges.get((v, x.text[i]))
        if v is None:
            break
    assert best is not None
    return best


def double_coset_member(g: Word, S: Iterable[Word], H: SubgroupAutomaton) -> bool:
    """Whether ``g`` lies in ``S H S``."""
    S = list(S)
    return any(membership(H, s1.inverse() * g * s2.inverse()) for s1 in S for s2 in S)


def _reduced_arrivals(H: SubgroupAutomaton) -> set[tuple[int, str]]:
    # (vertex, last letter) over all nonempty reduced paths from the base
    seen: set[tuple[int, str]] = set()
    stack = [(H.base, "")]
    while stack:
        v, last = stack.pop()
        for c in H.out_letters(v):
            if last and c == last.swapcase():
                continue
            w = H.edges[(v, c)]
            if (w, c) not in seen:
                seen.add((w, c))
                stack.append((w, c))
    return seen


def _pattern_embeds(H: SubgroupAutomaton, u: str, arrivals: set) -> bool:
    for v in range(H.n_vertices):
        end = H.trace(u, v)
        if end is None:
            continue
        head_ok = v == H.base or any((v, c) in arrivals for c in letter_order(H.rank) if c != u[0].swapcase())
        # a reduced return path end -> base reversed is a reduced path base -> end
        tail_ok = end == H.base or any((end, c) in arrivals for c in letter_order(H.rank) if c != u[-1])
        if head_ok and tail_ok:
            return True
    return False


def factor_free(H: SubgroupAutomaton, u: Word) -> bool:
    """True iff no reduced word of ``H`` contains ``u`` or ``u^-1`` as a factor.

    Decided on the graph: ``u`` must read along a path that extends, without
    backtracking at either end, to a reduced loop at the base.
    """
    if not u:
        raise ValueError("pattern must be nontrivial")
    arrivals = _reduced_arrivals(H)
    return not (_pattern_embeds(H, u.text, arrivals) or _pattern_embeds(H, u.inverse().text, arrivals))


def factor_free_oracle(H: SubgroupAutomaton, u: Word, radius: "int | None" = None) -> bool:
    """Enumeration referee for :func:`factor_free` at radius ``2|u| + 2 diam``."""
    if radius is None:
        radius = 2 * len(u) + 2 * H.diameter()
    ui = u.inverse().text
    return not any(u.text in h.text or ui in h.text for h in enumerate_subgroup(H, radius))


def orbit_distance_oracle(H: SubgroupAutomaton, x: Word, radius: int) -> int:
    return min(tree_distance(x, h) for h in enumerate_subgroup(H, radius))
