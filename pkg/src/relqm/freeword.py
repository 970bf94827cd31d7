"""Reduced words in the free group F_n and the geometry of its Cayley tree.

Generators are the letters ``a``..``z`` (indices 1..n) and their inverses
``A``..``Z``.  A :class:`Word` doubles as a group element and as a vertex of
the Cayley tree; the identity (empty word) is the base point.

All geometry here is exact integer geometry: distances are word lengths,
medians are longest common prefixes, and an :class:`Axis` is the
bi-infinite line of a primitive cyclically reduced root.
"""
from __future__ import annotations

from dataclasses import dataclass
from os.path import commonprefix
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Word", "CyclicData", "Axis", "reduce", "parse", "identity",
    "cyclic_data", "tree_distance", "axis_of", "project_point_to_axis",
    "ball", "sphere", "shortlex_key", "letter_order", "is_cyclically_reduced",
    "primitive_root", "cyclic_rotations", "exponent_sums",
]

MAX_RANK = 26


def _check_char(c: str, rank: int) -> None:
    if not c.isalpha() or not c.isascii():
        raise ValueError(f"invalid letter {c!r}")
    if ord(c.lower()) - 96 > rank:
        raise ValueError(f"letter {c!r} out of range for rank {rank}")


def _reduce_text(text: str) -> str:
    stack: list[str] = []
    for c in text:
        if stack and stack[-1] == c.swapcase():
            stack.pop()
        else:
            stack.append(c)
    return "".join(stack)


def _inverse_text(text: str) -> str:
    return text[::-1].swapcase()


def _join(left: str, right: str) -> str:
    # both inputs reduced; cancellation only happens at the junction
    k = 0
    n = min(len(left), len(right))
    while k < n and left[-1 - k] == right[k].swapcase():
        k += 1
    return left[: len(left) - k] + right[k:]


def letter_order(rank: int) -> str:
    """Letters in the global shortlex order ``a < A < b < B < ...``."""
    return "".join(chr(97 + i) + chr(65 + i) for i in range(rank))


_KEY = {c: i for i, c in enumerate(letter_order(MAX_RANK))}


def shortlex_key(w: "Word | str") -> tuple[int, tuple[int, ...]]:
    text = w.text if isinstance(w, Word) else w
    return (len(text), tuple(_KEY[c] for c in text))


@dataclass(frozen=True)
class Word:
    """A freely reduced word of the free group of the given rank.

    Use :func:`reduce` or :func:`parse` to build one from arbitrary input;
    the constructor itself insists on reduced text.
    """

    text: str = ""
    rank: int = 2

    def __post_init__(self) -> None:
        if not 1 <= self.rank <= MAX_RANK:
            raise ValueError(f"rank must be in 1..{MAX_RANK}, got {self.rank}")
        prev = ""
        for c in self.text:
            _check_char(c, self.rank)
            if prev and prev == c.swapcase():
                raise ValueError(f"{self.text!r} is not reduced")
            prev = c

    @property
    def letters(self) -> tuple[int, ...]:
        """Signed generator indices, e.g. ``"aB"`` -> ``(1, -2)``."""
        return tuple(ord(c) - 96 if c.islower() else -(ord(c) - 64) for c in self.text)

    @classmethod
    def from_letters(cls, letters: Iterable[int], rank: int = 2) -> "Word":
        chars = []
        for x in letters:
            if x == 0 or abs(x) > rank:
                raise ValueError(f"letter index {x} out of range for rank {rank}")
            chars.append(chr(96 + x) if x > 0 else chr(64 - x))
        return reduce("".join(chars), rank)

    def _new(self, text: str) -> "Word":
        # skip validation for text produced by internal reduced operations
        w = object.__new__(Word)
        object.__setattr__(w, "text", text)
        object.__setattr__(w, "rank", self.rank)
        return w

    def _same_rank(self, other: "Word") -> None:
        if other.rank != self.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")

    def __len__(self) -> int:
        return len(self.text)

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"Word({self.text!r})" if self.rank == 2 else f"Word({self.text!r}, rank={self.rank})"

    def __bool__(self) -> bool:
        return bool(self.text)

    def __lt__(self, other: "Word") -> bool:
        return shortlex_key(self) < shortlex_key(other)

    def __mul__(self, other: "Word") -> "Word":
        if isinstance(other, str):
            other = parse(other, self.rank)
        self._same_rank(other)
        return self._new(_join(self.text, other.text))

    def __rmul__(self, other: str) -> "Word":
        return parse(other, self.rank) * self

    def inverse(self) -> "Word":
        return self._new(_inverse_text(self.text))

    __invert__ = inverse

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0 or not self.text:
            return self._new("")
        u, core = _peel(self.text)
        return self._new(u + core * n + _inverse_text(u))

    def conjugate(self, t: "Word") -> "Word":
        """Return ``t * self * t^-1``."""
        return t * self * t.inverse()

    def contains(self, factor: "Word | str") -> bool:
        f = factor.text if isinstance(factor, Word) else factor
        return f in self.text


def reduce(raw: "str | Sequence[int]", rank: int = 2) -> Word:
    """Freely reduce a letter string (or a sequence of signed indices)."""
    if not isinstance(raw, str):
        return Word.from_letters(raw, rank)
    for c in raw:
        _check_char(c, rank)
    return Word(_reduce_text(raw), rank)


def parse(text: str, rank: int = 2) -> Word:
    return reduce(text, rank)


def identity(rank: int = 2) -> Word:
    return Word("", rank)


def _peel(text: str) -> tuple[str, str]:
    i, j = 0, len(text) - 1
    while i < j and text[i] == text[j].swapcase():
        i += 1
        j -= 1
    return text[:i], text[i : j + 1]


def is_cyclically_reduced(w: Word) -> bool:
    t = w.text
    return len(t) < 2 or t[0] != t[-1].swapcase()


def primitive_root(text: str) -> tuple[str, int]:
    """Split a cyclically reduced word as ``root ** exponent`` with a primitive root."""
    n = len(text)
    if not n:
        return text, 1
    # the first nonzero rotation fixing the word is its least period, which divides n
    d = (text + text).find(text, 1)
    return text[:d], n // d


@dataclass(frozen=True)
class CyclicData:
    conjugator: Word
    root: Word
    exponent: int

    @property
    def translation_length(self) -> int:
        return self.exponent * len(self.root)


def cyclic_data(g: Word) -> CyclicData:
    """Write ``g = u r^e u^-1`` with ``r`` primitive and cyclically reduced."""
    if not g:
        raise ValueError("the identity has no axis")
    u, core = _peel(g.text)
    r, e = primitive_root(core)
    return CyclicData(g._new(u), g._new(r), e)


def cyclic_rotations(text: str) -> list[str]:
    return [text[i:] + text[:i] for i in range(len(text))] if text else [""]


def exponent_sums(w: Word) -> tuple[int, ...]:
    sums = [0] * w.rank
    for x in w.letters:
        sums[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(sums)


def tree_distance(x: Word, y: Word) -> int:
    x._same_rank(y)
    c = len(commonprefix([x.text, y.text]))
    return len(x.text) + len(y.text) - 2 * c


def _median_text(x: str, y: str, z: str) -> str:
    return max(commonprefix([x, y]), commonprefix([y, z]), commonprefix([x, z]), key=len)


def median(x: Word, y: Word, z: Word) -> Word:
    return x._new(_median_text(x.text, y.text, z.text))


def _canonical_root(r: str) -> tuple[str, str, bool]:
    """Least rotation of ``r`` or ``r^-1``: returns (least, shift prefix, from_inverse)."""
    best = None
    for inverted, base in ((False, r), (True, _inverse_text(r))):
        for i in range(len(base)):
            rot = base[i:] + base[:i]
            key = shortlex_key(rot)
            if best is None or key < best[0]:
                best = (key, rot, base[:i], inverted)
    assert best is not None
    return best[1], best[2], best[3]


@dataclass(frozen=True)
class Axis:
    """The unoriented line ``{u r^k p}`` through ``u`` with primitive root ``r``.

    Instances are canonical: ``root`` is the shortlex-least rotation of
    ``r`` or ``r^-1`` and ``rep`` is the shortlex-least element of the coset
    ``rep * <root>``.  Equality of axes is therefore equality of lines.
    Build them with :meth:`through` or :func:`axis_of`.
    """

    rep: Word
    root: Word

    @classmethod
    def through(cls, u: Word, r: Word) -> "Axis":
        if not r or not is_cyclically_reduced(r):
            raise ValueError(f"axis root must be nontrivial and cyclically reduced, got {r!r}")
        prim, _ = primitive_root(r.text)
        least, shift, _ = _canonical_root(prim)
        # u * shift sits at a period boundary of the canonical root
        phase = u * r._new(shift)
        root = r._new(least)
        return cls(_coset_min(phase, root), root)

    def translate(self, b: Word) -> "Axis":
        return Axis.through(b * self.rep, self.root)

    @property
    def period(self) -> int:
        return len(self.root)

    def point(self, t: int) -> Word:
        """Vertex at signed arc-length position ``t`` (``point(0) == rep``)."""
        r = self.root
        q, s = divmod(t, len(r))
        return self.rep * (r ** q) * r._new(r.text[:s])

    def position(self, x: Word) -> "int | None":
        """Inverse of :meth:`point`; ``None`` when ``x`` is off the line."""
        y = (self.rep.inverse() * x).text
        r = self.root.text
        reps = len(y) // len(r) + 1
        if (r * reps).startswith(y):
            return len(y)
        ri = _inverse_text(r)
        if (ri * reps).startswith(y):
            return -len(y)
        return None

    def contains(self, x: Word) -> bool:
        return self.position(x) is not None

    def closest_position(self) -> int:
        """Position of the vertex of the line nearest the base point."""
        p, _ = project_point_to_axis(self.rep._new(""), self)
        t = self.position(p)
        assert t is not None
        return t

    def vertices_within(self, radius: int) -> list[Word]:
        """All vertices of the line within ``radius`` of the base point."""
        t0 = self.closest_position()
        d0 = len(self.point(t0))
        out = [self.point(t) for t in range(t0 - (radius - d0), t0 + (radius - d0) + 1)]
        return [w for w in out if len(w) <= radius]

    def label(self) -> str:
        return f"({self.rep.text},{self.root.text})"


def _coset_min(phase: Word, root: Word) -> Word:
    """Shortlex-least element of ``phase * <root>``."""
    k = 0
    cur = len(phase)
    while len(phase * root ** (k - 1)) < cur:
        k -= 1
        cur = len(phase * root ** k)
    while len(phase * root ** (k + 1)) < cur:
        k += 1
        cur = len(phase * root ** k)
    cands = [phase * root ** j for j in (k - 1, k, k + 1)]
    m = min(len(c) for c in cands)
    return min((c for c in cands if len(c) == m), key=shortlex_key)


def axis_of(g: Word) -> Axis:
    cd = cyclic_data(g)
    return Axis.through(cd.conjugator, cd.root)


def _project_to_segment(x: str, p: str, q: str) -> str:
    return _median_text(x, p, q)


def project_point_to_axis(x: Word, axis: Axis) -> tuple[Word, int]:
    """Closest vertex of ``axis`` to ``x`` and its distance.

    The line is truncated to ``{u r^k : |k| <= N}`` and ``N`` is doubled
    until the answer has been unchanged for two consecutive doublings.
    """
    x._same_rank(axis.rep)
    n = 1
    history: list[str] = []
    per = axis.period
    while True:
        lo = axis.point(-n * per).text
        hi = axis.point(n * per).text
        history.append(_project_to_segment(x.text, lo, hi))
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            break
        if n > 1 << 40:
            raise RuntimeError("projection did not stabilize")
        n *= 2
    p = x._new(history[-1])
    return p, tree_distance(x, p)


def sphere(radius: int, rank: int = 2) -> list[Word]:
    """Reduced words of length exactly ``radius``, shortlex sorted."""
    return [w for w in ball(radius, rank) if len(w) == radius]


def ball(radius: int, rank: int = 2) -> list[Word]:
    """Reduced words of length at most ``radius``, shortlex sorted."""
    letters = letter_order(rank)
    layer = [""]
    out = [""]
    for _ in range(radius):
        nxt = []
        for t in layer:
            for c in letters:
                if t and t[-1] == c.swapcase():
                    continue
                nxt.append(t + c)
        out.extend(nxt)
        layer = nxt
    proto = Word("", rank)
    return [proto._new(t) for t in out]


def iter_shortlex(rank: int = 2, start: int = 0) -> Iterator[Word]:
    """All reduced words in shortlex order, from length ``start`` on."""
    letters = letter_order(rank)
    proto = Word("", rank)
    layer = [w.text for w in sphere(start, rank)] if start else [""]
    while True:
        for t in layer:
            yield proto._new(t)
        layer = [t + c for t in layer for c in letters if not (t and t[-1] == c.swapcase())]
