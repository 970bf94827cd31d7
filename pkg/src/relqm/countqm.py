"""Epstein-Fujiwara counting quasimorphisms on the Cayley tree of F_n.

For a pattern ``w`` and weight ``0 < W < |w|``::

    c_{w,W}(g) = |g| - inf_alpha (|alpha| - W |alpha|_w)

over edge paths ``alpha`` from ``o`` to ``g.o``, where ``|alpha|_w`` is the
largest number of non-overlapping copies of ``w`` along ``alpha``.  With
``W = 1`` the geodesic realizes the infimum and ``c`` is a copy count; for
``W >= 2`` detours can pay off and ``c`` is computed by an exact min-plus
automaton.  :func:`oracle_c` searches walks directly and is the referee.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .freeword import Word, ball, letter_order, parse, shortlex_key, tree_distance, _peel

__all__ = [
    "QmSpec", "DefectReport", "HomogEstimate", "count_copies", "count_copies_dp",
    "c_value", "h_value", "oracle_c", "oracle_c_ball", "defect_scan", "homogenize",
    "stable_value", "morse_constant", "paper_defect_bound", "write_defect_csv",
    "defect_probe",
]

MAX_POWER_LENGTH = 50_000_000


@dataclass(frozen=True)
class QmSpec:
    w: Word
    W: int = 1

    def __post_init__(self) -> None:
        if len(self.w) < 2:
            raise ValueError("pattern must have length at least 2")
        if not 0 < self.W < len(self.w):
            raise ValueError(f"weight must satisfy 0 < W < |w| = {len(self.w)}, got {self.W}")

    @classmethod
    def of(cls, w: "str | Word", W: int = 1, rank: int = 2) -> "QmSpec":
        return cls(parse(w, rank) if isinstance(w, str) else w, W)

    def inverse(self) -> "QmSpec":
        return QmSpec(self.w.inverse(), self.W)


@dataclass(frozen=True)
class DefectReport:
    spec: QmSpec
    radius: int
    empirical_defect: int
    paper_bound: int
    L0: int
    witnesses: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class HomogEstimate:
    value: Fraction
    error_bound: Fraction
    n_used: int


def count_copies(alpha: "Word | str", w: "Word | str") -> int:
    """Largest number of non-overlapping occurrences of ``w`` in ``alpha``.

    Greedy leftmost matching; copies may share an endpoint vertex.
    """
    t = alpha.text if isinstance(alpha, Word) else alpha
    p = w.text if isinstance(w, Word) else w
    if not p:
        raise ValueError("pattern must be nontrivial")
    n = 0
    i = t.find(p)
    while i >= 0:
        n += 1
        i = t.find(p, i + len(p))
    return n


def count_copies_dp(alpha: "Word | str", w: "Word | str") -> int:
    """Dynamic-programming referee for :func:`count_copies`."""
    t = alpha.text if isinstance(alpha, Word) else alpha
    p = w.text if isinstance(w, Word) else w
    k = len(p)
    best = [0] * (len(t) + 1)
    for i in range(1, len(t) + 1):
        best[i] = best[i - 1]
        if i >= k and t[i - k : i] == p:
            best[i] = max(best[i], best[i - k] + 1)
    return best[-1]


DP_MAX_PATTERN = 64
_INF = 1 << 40


def _minplus(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.minimum((A[..., :, :, None] + B[..., None, :, :]).min(axis=-2), _INF)


class _PathDP:
    """Exact ``inf (|alpha| - W |alpha|_w)`` over all walks, as a min-plus automaton.

    A walk's label reduces to ``g`` exactly when it is ``g`` with words that
    reduce to the identity spliced in before, between and after its letters.
    States ``0..|w|-1`` record how much of a chosen copy has been read.
    ``T[p, q]`` is the cheapest identity word driving state ``p`` to ``q``,
    the least fixed point of ``T = 1 | T T | x T x^-1``.
    """

    def __init__(self, spec: QmSpec):
        w, k, W = spec.w.text, len(spec.w), spec.W
        self.k = k
        self.letters = letter_order(spec.w.rank)
        S = {}
        for x in self.letters:
            m = np.full((k, k), _INF, dtype=np.int64)
            m[0, 0] = 1
            if x == w[0]:
                m[0, 1] = 1
            for j in range(1, k):
                if x == w[j]:
                    if j + 1 == k:
                        m[j, 0] = 1 - W
                    else:
                        m[j, j + 1] = 1
            S[x] = m
        T = np.full((k, k), _INF, dtype=np.int64)
        np.fill_diagonal(T, 0)
        while True:
            new = np.minimum(T, _minplus(T, T))
            for x in self.letters:
                new = np.minimum(new, _minplus(_minplus(S[x], T), S[x.swapcase()]))
            if np.array_equal(new, T):
                break
            T = new
        self.T = T
        self.step = {x: _minplus(T, S[x]) for x in self.letters}

    def cost(self, text: str) -> int:
        v = np.full(self.k, _INF, dtype=np.int64)
        v[0] = 0
        for c in text:
            v = _minplus(v[None, :], self.step[c])[0]
        return int(_minplus(v[None, :], self.T).min())

    def transfer(self, text: str) -> np.ndarray:
        M = np.full((self.k, self.k), _INF, dtype=np.int64)
        np.fill_diagonal(M, 0)
        for c in text:
            M = _minplus(M, self.step[c])
        return M


@lru_cache(maxsize=64)
def _path_dp(spec: QmSpec) -> _PathDP:
    if len(spec.w) > DP_MAX_PATTERN:
        raise ValueError(f"exact path infimum for W >= 2 needs |w| <= {DP_MAX_PATTERN}, got {len(spec.w)}")
    return _PathDP(spec)


def c_value(spec: QmSpec, g: Word) -> int:
    """``c_{w,W}(g)``.

    For ``W = 1`` the geodesic realizes the infimum: a detour of depth ``d``
    costs ``2d`` letters and completes at most ``2 ceil(d/|w|) <= 2d`` extra
    copies, so ``c = copies(g, w)``.  For larger ``W`` a short detour can pay
    for itself and the exact automaton computation is used.
    """
    if spec.W == 1:
        return count_copies(g, spec.w)
    return len(g) - _path_dp(spec).cost(g.text)


def h_value(spec: QmSpec, g: Word) -> int:
    if spec.W == 1:
        return count_copies(g, spec.w) - count_copies(g, spec.w.inverse())
    return c_value(spec, g) - c_value(spec.inverse(), g)


def _h_text(text: str, w: str, wi: str, W: int, rank: int = 2) -> int:
    if W == 1:
        return count_copies(text, w) - count_copies(text, wi)
    return h_value(QmSpec.of(w, W, rank), parse(text, rank))


def c_value_ball(spec: QmSpec, radius: int) -> dict[str, int]:
    """``c_{w,W}`` on every element of the ball, one min-plus step per tree edge."""
    idx = _ball_index(radius, spec.w.rank)
    if spec.W == 1:
        return {t: count_copies(t, spec.w.text) for t in (idx.text(v) for v in range(idx.size))}
    dp = _path_dp(spec)
    V = np.full((idx.size, dp.k), _INF, dtype=np.int64)
    V[0, 0] = 0
    steps = np.stack([dp.step[x] for x in idx.letters])
    # BFS order: parents precede children
    for r in range(1, radius + 1):
        layer = np.nonzero(idx.length == r)[0]
        V[layer] = _minplus(V[idx.parent[layer]][:, None, :], steps[idx.last[layer]])[:, 0, :]
    cost = _minplus(V[:, None, :], dp.T)[:, 0, :].min(axis=1)
    return {idx.text(v): int(idx.length[v] - cost[v]) for v in range(idx.size)}


# --------------------------------------------------------------------------
# path-infimum oracle


def oracle_c(spec: QmSpec, g: Word, slack: int) -> int:
    """``|g| - inf (|alpha| - W|alpha|_w)`` over walks with ``|alpha| <= |g| + slack``.

    Walks are explored as a layered longest-path problem: plain edge steps
    cost one unit of length, a traversal of a copy of ``w`` costs ``|w|``
    and adds one copy.  A walk of length ``|g| + slack`` never strays more
    than ``slack // 2`` from the geodesic, well inside the detour-depth cap
    ``|w| (slack + 1)``.
    """
    if slack < 0:
        raise ValueError("slack must be non-negative")
    budget = len(g) + slack
    o = g._new("")
    letters = letter_order(g.rank)

    def inside(v: str) -> bool:
        return len(v) + tree_distance(g._new(v), g) <= budget

    layers: list[dict[str, int]] = [dict() for _ in range(budget + 1)]
    layers[0][""] = 0
    k = len(spec.w)
    for n in range(budget + 1):
        for v, copies in layers[n].items():
            if n + 1 <= budget:
                for c in letters:
                    u = v[:-1] if v and v[-1] == c.swapcase() else v + c
                    if inside(u) and layers[n + 1].get(u, -1) < copies:
                        layers[n + 1][u] = copies
            if n + k <= budget:
                u = (o._new(v) * spec.w).text
                if inside(u) and layers[n + k].get(u, -1) < copies + 1:
                    layers[n + k][u] = copies + 1
    best = min(n - spec.W * layer[g.text] for n, layer in enumerate(layers) if g.text in layer)
    return len(g) - best


class _BallIndex:
    """Vertices of a ball in the rank-2.. Cayley tree as array indices (BFS order)."""

    def __init__(self, radius: int, rank: int = 2):
        letters = letter_order(rank)
        nl = len(letters)
        inv = np.array([letters.index(c.swapcase()) for c in letters])
        parent = [np.array([-1])]
        last = [np.array([-1])]
        lengths = [np.array([0])]
        starts = [0]
        total = 1
        for r in range(1, radius + 1):
            pl = last[-1]
            p_idx = np.arange(starts[-1], starts[-1] + len(pl))
            kids_p, kids_c = [], []
            for c in range(nl):
                ok = (pl != inv[c]) if r > 1 else np.ones(len(pl), bool)
                kids_p.append(p_idx[ok])
                kids_c.append(np.full(ok.sum(), c))
            kp = np.concatenate(kids_p)
            kc = np.concatenate(kids_c)
            order = np.lexsort((kc, kp))
            kp, kc = kp[order], kc[order]
            starts.append(total)
            total += len(kp)
            parent.append(kp)
            last.append(kc)
            lengths.append(np.full(len(kp), r))
        self.size = total
        self.parent = np.concatenate(parent)
        self.last = np.concatenate(last)
        self.length = np.concatenate(lengths)
        self.letters = letters
        self.rank = rank
        # step[v, c] = index of v*c, or size (sentinel) when it leaves the ball
        step = np.full((total + 1, nl), total, dtype=np.int64)
        child = np.arange(1, total)
        step[self.parent[1:], self.last[1:]] = child
        nonroot = np.arange(1, total)
        step[nonroot, inv[self.last[1:]]] = self.parent[1:]
        self.step = step
        self._text_cache: dict[int, str] = {}

    def index(self, text: str) -> int:
        v = 0
        for c in text:
            v = self.step[v, self.letters.index(c)]
        return int(v)

    def text(self, v: int) -> str:
        out = []
        while v > 0:
            out.append(self.letters[self.last[v]])
            v = self.parent[v]
        return "".join(reversed(out))

    def walk(self, text: str) -> np.ndarray:
        """``v -> v * text`` for every vertex, sentinel when leaving the ball."""
        v = np.arange(self.size + 1)
        for c in text:
            v = self.step[v, self.letters.index(c)]
        return v


@lru_cache(maxsize=4)
def _ball_index(radius: int, rank: int) -> _BallIndex:
    return _BallIndex(radius, rank)


def oracle_c_ball(w: Word, weights: Sequence[int], max_length: int, slack: int) -> dict[int, dict[str, int]]:
    """:func:`oracle_c` for every reduced ``g`` with ``|g| <= max_length`` at once.

    Same layered program as :func:`oracle_c`, run over the ball of radius
    ``max_length + slack // 2`` (the farthest any admissible walk can reach)
    with numpy gathers.  Returns ``{W: {g_text: value}}``.
    """
    budget = max_length + slack
    radius = max_length + slack // 2
    bi = _ball_index(radius, w.rank)
    k = len(w)
    size = bi.size
    pred_w = bi.walk(w.inverse().text)  # v -> v * w^-1
    best = np.full((budget + 1, size + 1), -1, dtype=np.int32)
    best[0, 0] = 0
    for n in range(budget):
        cur = best[n]
        nxt = best[n + 1]
        for c in range(len(bi.letters)):
            np.maximum(nxt, cur[bi.step[:, c]], out=nxt)
        nxt[size] = -1
        if n + k <= budget:
            gain = cur[pred_w]
            gain = np.where(gain >= 0, gain + 1, -1)
            np.maximum(best[n + k], gain, out=best[n + k])
            best[n + k, size] = -1
    targets = np.nonzero(bi.length <= max_length)[0]
    lens = bi.length[targets]
    out: dict[int, dict[str, int]] = {}
    for W in weights:
        inf = np.full(len(targets), np.iinfo(np.int32).max, dtype=np.int64)
        for n in range(budget + 1):
            vals = best[n, targets].astype(np.int64)
            ok = (vals >= 0) & (n <= lens + slack)
            inf = np.where(ok, np.minimum(inf, n - W * vals), inf)
        out[W] = {bi.text(int(v)): int(lens[i] - inf[i]) for i, v in enumerate(targets)}
    return out


# --------------------------------------------------------------------------
# defect


def morse_constant(spec: QmSpec) -> int:
    """Morse-lemma constant ``L_0`` for the quasi-geodesic constants of ``spec``, in a tree.

    A ``(lam, eps)``-quasi-geodesic edge path in a tree contains the geodesic
    between its endpoints, and a backtracking excursion of depth ``D`` from
    a geodesic vertex forces ``2D / lam <= eps``.  Hence ``L_0 = ceil(lam eps / 2)``
    with ``lam = |w|/(|w|-W)`` and ``eps = 2W|w|/(|w|-W)``.
    """
    n, W = len(spec.w), spec.W
    return math.ceil(Fraction(W * n * n, (n - W) ** 2))


def paper_defect_bound(spec: QmSpec, delta: int = 0) -> int:
    return 12 * morse_constant(spec) + 6 * spec.W + 48 * delta


def defect_scan(spec: QmSpec, radius: int, max_witnesses: int = 20) -> DefectReport:
    """Exhaustive ``max |h(gh) - h(g) - h(h)|`` over ``|g|, |h| <= radius``."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    words = [x.text for x in ball(radius, spec.w.rank)]
    w, wi, W = spec.w.text, spec.w.inverse().text, spec.W
    cache: dict[str, int] = {}

    def hv(t: str) -> int:
        v = cache.get(t)
        if v is None:
            v = cache[t] = _h_text(t, w, wi, W, spec.w.rank)
        return v

    from .freeword import _join

    hs = [hv(t) for t in words]
    best = 0
    witnesses: list[tuple[str, str]] = []
    for i, a in enumerate(words):
        ha = hs[i]
        for j, b in enumerate(words):
            dev = abs(hv(_join(a, b)) - ha - hs[j])
            if dev > best:
                best = dev
                witnesses = [(a, b)]
            elif dev == best and dev > 0 and len(witnesses) < max_witnesses:
                witnesses.append((a, b))
    return DefectReport(spec, radius, best, paper_defect_bound(spec), morse_constant(spec), tuple(witnesses))


def defect_probe(spec: QmSpec, words: Iterable[Word]) -> int:
    """Largest deviation over all prefix/suffix splits ``x = p * s`` of the given words.

    Complements :func:`defect_scan` for long patterns, whose copies never fit
    in a small ball.
    """
    best = 0
    for x in words:
        t = x.text
        for i in range(len(t) + 1):
            p, s = x._new(t[:i]), x._new(t[i:])
            best = max(best, abs(h_value(spec, x) - h_value(spec, p) - h_value(spec, s)))
    return best


def write_defect_csv(path, spec: QmSpec, radii: Iterable[int], rows: str = "witnesses") -> None:
    """CSV with columns radius, g, h, deviation in shortlex order.

    ``rows="witnesses"`` writes the maximizing pairs of each radius,
    ``rows="nonzero"`` every pair with positive deviation.
    """
    from .freeword import _join

    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["radius", "g", "h", "deviation"])
        for r in radii:
            if rows == "witnesses":
                rep = defect_scan(spec, r, max_witnesses=10_000)
                pairs = sorted(rep.witnesses, key=lambda p: (shortlex_key(p[0]), shortlex_key(p[1])))
                for a, b in pairs:
                    out.writerow([r, a, b, rep.empirical_defect])
            else:
                words = [x.text for x in ball(r, spec.w.rank)]
                w, wi, rk = spec.w.text, spec.w.inverse().text, spec.w.rank
                for a in words:
                    for b in words:
                        dev = abs(_h_text(_join(a, b), w, wi, spec.W, rk) - _h_text(a, w, wi, spec.W, rk)
                                  - _h_text(b, w, wi, spec.W, rk))
                        if dev:
                            out.writerow([r, a, b, dev])


# --------------------------------------------------------------------------
# homogenization


@lru_cache(maxsize=256)
def _cached_defect(spec: QmSpec, radius: int) -> int:
    return defect_scan(spec, radius).empirical_defect


def homogenize(spec: QmSpec, g: Word, n: int, defect: "int | None" = None,
               defect_radius: int = 3, max_length: int = MAX_POWER_LENGTH) -> HomogEstimate:
    """``h(g^n) / n`` with error bound ``defect / n``.

    ``defect`` defaults to the empirical defect over the ball of radius
    ``defect_radius`` (cached per spec).
    """
    if n < 1:
        raise ValueError("n must be positive")
    u, core = _peel(g.text)
    if 2 * len(u) + n * len(core) > max_length:
        raise OverflowError(f"|g^{n}| exceeds {max_length} letters")
    if defect is None:
        defect = _cached_defect(spec, defect_radius)
    return HomogEstimate(Fraction(h_value(spec, g ** n), n), Fraction(defect, n), n)


def _cyclic_rate(core: str, w: str) -> Fraction:
    # copies of w per period of the bi-infinite periodic word core^Z under greedy matching
    p = len(core)
    window = core * (len(w) // p + 3)
    if w not in window:
        return Fraction(0)
    seen: dict[int, tuple[int, int]] = {}
    pos, copies = 0, 0
    while pos % p not in seen:
        seen[pos % p] = (pos, copies)
        j = window.find(w, pos % p)
        pos += (j - pos % p) + len(w)
        copies += 1
    pos0, copies0 = seen[pos % p]
    return Fraction(copies - copies0, 1) * p / (pos - pos0)


def _min_cycle_mean(M: np.ndarray, source: int = 0) -> Fraction:
    # Karp, restricted to cycles reachable from source
    n = len(M)
    D = np.full((n + 1, n), _INF, dtype=np.int64)
    D[0, source] = 0
    for j in range(1, n + 1):
        D[j] = _minplus(D[j - 1][None, :], M)[0]
    best = None
    for v in range(n):
        if D[n, v] >= _INF:
            continue
        worst = max(Fraction(int(D[n, v] - D[j, v]), n - j) for j in range(n) if D[j, v] < _INF)
        best = worst if best is None else min(best, worst)
    if best is None:
        raise ValueError("no cycle reachable from the source")
    return best


def stable_value(spec: QmSpec, g: Word) -> Fraction:
    """Exact homogenization ``lim h(g^n)/n``.

    For ``W = 1`` the greedy matcher on ``core^n`` is a finite-state process
    in the phase ``position mod |core|`` and its cycle gives the copy rate.
    Otherwise the walk cost of ``core^n`` grows at the minimum cycle mean of
    the automaton's transfer matrix over one period.
    """
    _, core = _peel(g.text)
    if not core:
        return Fraction(0)
    if spec.W == 1:
        return _cyclic_rate(core, spec.w.text) - _cyclic_rate(core, spec.w.inverse().text)
    n = len(core)
    c = [n - _min_cycle_mean(_path_dp(s).transfer(core)) for s in (spec, spec.inverse())]
    return c[0] - c[1]
