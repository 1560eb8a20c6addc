"""Finite k-graphs presented as a colored skeleton plus factorization squares.

Paths are stored in canonical form: the edge word sorted by color, all
color-1 edges first (nearest the range), then color 2, and so on.  Two paths
are equal iff their canonical words (and, for vertices, their vertex) agree.
Composition follows the convention s(lambda) = r(mu) for lambda.mu, so a
word (e1, e2, ...) has s(e1) = r(e2).
"""

from __future__ import annotations

import itertools
import os
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import degrees as dg
from .degrees import Degree
from .errors import CapExceeded, InvalidKGraph, NotComposable, OutOfRange

DEFAULT_CAP_ENV = "KGKMS_DEGREE_CAP"


@dataclass(frozen=True)
class Edge:
    id: str
    color: int
    range: str
    source: str


@dataclass(frozen=True)
class Skeleton:
    k: int
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]


@dataclass(frozen=True)
class Square:
    """The identity e.f = f_hat.e_hat with color(e) = i < j = color(f)."""

    i: int
    j: int
    ef: Tuple[str, str]
    fe: Tuple[str, str]


@dataclass(frozen=True)
class Path:
    degree: Degree
    word: Tuple[str, ...]
    range: str
    source: str

    @property
    def is_vertex(self) -> bool:
        return not self.word

    def __str__(self):
        return self.range if not self.word else ".".join(self.word)


# Violations reported by validate().  They are plain records, not exceptions:
# validate() collects all of them and raises a single InvalidKGraph.

@dataclass(frozen=True)
class Malformed:
    detail: str

    def __str__(self):
        return f"Malformed({self.detail})"


@dataclass(frozen=True)
class NoSources:
    vertex: str
    color: int

    def __str__(self):
        return f"NoSources(vertex={self.vertex}, color={self.color})"


@dataclass(frozen=True)
class NotBijective:
    i: int
    j: int
    detail: str

    def __str__(self):
        return f"NotBijective(i={self.i}, j={self.j}: {self.detail})"


@dataclass(frozen=True)
class EndpointMismatch:
    square: Square
    detail: str

    def __str__(self):
        return f"EndpointMismatch({self.square.ef}->{self.square.fe}: {self.detail})"


@dataclass(frozen=True)
class CubeInconsistent:
    witness: Tuple[str, str, str]
    results: Tuple[Tuple[str, ...], ...]

    def __str__(self):
        return f"CubeInconsistent(witness={self.witness}, normal forms={self.results})"


def default_cap(k: int) -> Degree:
    text = os.environ.get(DEFAULT_CAP_ENV)
    if text:
        return dg.parse(text, k)
    return (4,) * k


class KGraph:
    """A validated k-graph.  Construct with :func:`validate`."""

    def __init__(self, skeleton: Skeleton, squares: Sequence[Square], degree_cap: Optional[Degree] = None):
        self.skeleton = skeleton
        self.k = skeleton.k
        self.vertices = tuple(skeleton.vertices)
        self.squares = tuple(squares)
        self.degree_cap = tuple(degree_cap) if degree_cap is not None else default_cap(self.k)
        self.edges: Dict[str, Edge] = {e.id: e for e in skeleton.edges}
        self._color = {e.id: e.color for e in skeleton.edges}
        self._in: Dict[Tuple[str, int], List[str]] = {}
        for e in sorted(skeleton.edges, key=lambda e: e.id):
            self._in.setdefault((e.range, e.color), []).append(e.id)
        # swap table covers both directions: keys (x, y) with distinct colors
        self._swap: Dict[Tuple[str, str], Tuple[str, str]] = {}
        for sq in self.squares:
            self._swap[sq.ef] = sq.fe
            self._swap[sq.fe] = sq.ef
        self._lock = threading.Lock()
        self._table: Dict[Tuple[Optional[str], Degree], Tuple[Path, ...]] = {}
        self.segment = lru_cache(maxsize=1 << 18)(self._segment)
        self.compose = lru_cache(maxsize=1 << 18)(self._compose)

    def __repr__(self):
        return f"KGraph(k={self.k}, vertices={len(self.vertices)}, edges={len(self.edges)})"

    def with_cap(self, cap: Sequence[int]) -> "KGraph":
        return KGraph(self.skeleton, self.squares, tuple(cap))

    # -- basic paths -------------------------------------------------------

    def color(self, edge_id: str) -> int:
        return self._color[edge_id]

    def vertex(self, v: str) -> Path:
        if v not in self.vertices:
            raise KeyError(v)
        return Path(dg.zero(self.k), (), v, v)

    def edge(self, edge_id: str) -> Path:
        e = self.edges[edge_id]
        return Path(dg.unit(self.k, e.color), (edge_id,), e.range, e.source)

    def path(self, word: Iterable[str]) -> Path:
        """Build a path from any composable edge word (any color order)."""
        word = tuple(word)
        if not word:
            raise ValueError("use vertex() for degree-zero paths")
        for a, b in zip(word, word[1:]):
            if self.edges[a].source != self.edges[b].range:
                raise NotComposable(f"{a} then {b}")
        return self._from_word(self.reorder(word, sorted(self._color[e] for e in word)))

    def _from_word(self, word: Sequence[str]) -> Path:
        deg = [0] * self.k
        for e in word:
            deg[self._color[e] - 1] += 1
        return Path(tuple(deg), tuple(word), self.edges[word[0]].range, self.edges[word[-1]].source)

    # -- normalization -----------------------------------------------------

    def reorder(self, word: Sequence[str], target: Sequence[int]) -> List[str]:
        """Rewrite ``word`` via squares so its color sequence is ``target``."""
        w = list(word)
        col = self._color
        for t, c in enumerate(target):
            u = t
            while col[w[u]] != c:
                u += 1
            while u > t:
                w[u - 1], w[u] = self._swap[(w[u - 1], w[u])]
                u -= 1
        return w

    def _compose(self, lam: Path, mu: Path) -> Path:
        if lam.source != mu.range:
            raise NotComposable(f"s({lam}) = {lam.source} but r({mu}) = {mu.range}")
        if lam.is_vertex:
            return mu
        if mu.is_vertex:
            return lam
        deg = dg.add(lam.degree, mu.degree)
        word = self.reorder(lam.word + mu.word, dg.colors_of(deg))
        return Path(deg, tuple(word), lam.range, mu.source)

    def _segment(self, lam: Path, p: Degree, q: Degree) -> Path:
        d = lam.degree
        if not (dg.leq(p, q) and dg.leq(q, d)):
            raise OutOfRange(f"need {p} <= {q} <= {d}")
        if p == q:
            return self.vertex(self._vertex_at(lam, p))
        if dg.total(p) == 0 and q == d:
            return lam
        target = dg.colors_of(p) + dg.colors_of(dg.sub(q, p)) + dg.colors_of(dg.sub(d, q))
        w = self.reorder(lam.word, target)
        a, b = dg.total(p), dg.total(q)
        return Path(dg.sub(q, p), tuple(w[a:b]), self.edges[w[a]].range, self.edges[w[b - 1]].source)

    def _vertex_at(self, lam: Path, p: Degree) -> str:
        if dg.total(p) == 0:
            return lam.range
        if p == lam.degree:
            return lam.source
        w = self.reorder(lam.word, dg.colors_of(p) + dg.colors_of(dg.sub(lam.degree, p)))
        return self.edges[w[dg.total(p) - 1]].source

    # -- enumeration -------------------------------------------------------

    def paths(self, v: Optional[str], n: Sequence[int]) -> Tuple[Path, ...]:
        """vLambda^n (or Lambda^n when v is None), lexicographic on words."""
        n = tuple(n)
        key = (v, n)
        hit = self._table.get(key)
        if hit is not None:
            return hit
        if v is None:
            found = [p for w in self.vertices for p in self.paths(w, n)]
            found.sort(key=lambda p: (p.word, p.range))
            out = tuple(found)
        else:
            out = tuple(self._enumerate(v, n))
        if dg.leq(n, self.degree_cap):
            with self._lock:
                self._table.setdefault(key, out)
        return out

    def _enumerate(self, v: str, n: Degree) -> Iterable[Path]:
        colors = dg.colors_of(n)
        if not colors:
            yield self.vertex(v)
            return
        stack = [(v, ())]
        # depth-first in reverse so the output is lexicographic
        while stack:
            at, word = stack.pop()
            if len(word) == len(colors):
                yield Path(n, word, v, at)
                continue
            nxt = self._in.get((at, colors[len(word)]), [])
            for e in reversed(nxt):
                stack.append((self.edges[e].source, word + (e,)))

    def paths_upto(self, v: Optional[str], n: Sequence[int]) -> List[Path]:
        out: List[Path] = []
        for m in dg.box(n):
            out.extend(self.paths(v, m))
        return out

    def check_cap(self, n: Sequence[int]) -> None:
        if not dg.leq(n, self.degree_cap):
            raise CapExceeded(f"degree {tuple(n)} exceeds cap {self.degree_cap}")

    # -- common extensions -------------------------------------------------

    def lambda_min(self, mu: Path, nu: Path) -> Tuple[Tuple[Path, Path], ...]:
        """Pairs (eta, zeta) with mu.eta = nu.zeta of degree d(mu) v d(nu)."""
        if mu.range != nu.range:
            return ()
        m = dg.join(mu.degree, nu.degree)
        a = dg.meet(mu.degree, nu.degree)
        if self.segment(mu, dg.zero(self.k), a) != self.segment(nu, dg.zero(self.k), a):
            return ()
        out = []
        for eta in self.paths(mu.source, dg.sub(m, mu.degree)):
            sigma = self.compose(mu, eta)
            if self.segment(sigma, dg.zero(self.k), nu.degree) == nu:
                out.append((eta, self.segment(sigma, nu.degree, m)))
        return tuple(out)

    def mce(self, lam: Path, mu: Path) -> Tuple[Path, ...]:
        return tuple(self.compose(lam, eta) for eta, _ in self.lambda_min(lam, mu))


# -- validation -------------------------------------------------------------

def validate(skeleton: Skeleton, squares: Sequence[Square], degree_cap: Optional[Degree] = None) -> KGraph:
    """Check the k-graph axioms; raise InvalidKGraph listing every violation."""
    problems: list = []
    k = skeleton.k
    if k < 1:
        raise InvalidKGraph([Malformed(f"rank must be >= 1, got {k}")])
    verts = set(skeleton.vertices)
    if len(verts) != len(skeleton.vertices):
        problems.append(Malformed("duplicate vertex ids"))
    edges: Dict[str, Edge] = {}
    for e in skeleton.edges:
        if e.id in edges:
            problems.append(Malformed(f"duplicate edge id {e.id}"))
        edges[e.id] = e
        if not 1 <= e.color <= k:
            problems.append(Malformed(f"edge {e.id} has color {e.color} outside 1..{k}"))
        for end in (e.range, e.source):
            if end not in verts:
                problems.append(Malformed(f"edge {e.id} uses unknown vertex {end}"))
    for v in skeleton.vertices:
        for c in range(1, k + 1):
            if not any(e.range == v and e.color == c for e in skeleton.edges):
                problems.append(NoSources(v, c))
    if problems:
        raise InvalidKGraph(problems)

    by_pair: Dict[Tuple[int, int], List[Square]] = {}
    for sq in squares:
        ids = (*sq.ef, *sq.fe)
        unknown = [x for x in ids if x not in edges]
        if unknown:
            problems.append(Malformed(f"square {sq.ef}->{sq.fe} names unknown edges {unknown}"))
            continue
        e, f = (edges[x] for x in sq.ef)
        fh, eh = (edges[x] for x in sq.fe)
        if not (1 <= sq.i < sq.j <= k) or (e.color, f.color, fh.color, eh.color) != (sq.i, sq.j, sq.j, sq.i):
            problems.append(EndpointMismatch(sq, "colors do not match (i, j, j, i) with i < j"))
            continue
        if e.source != f.range or fh.source != eh.range:
            problems.append(EndpointMismatch(sq, "a side of the square is not composable"))
            continue
        if fh.range != e.range or eh.source != f.source:
            problems.append(EndpointMismatch(sq, "range/source of the two sides differ"))
            continue
        by_pair.setdefault((sq.i, sq.j), []).append(sq)

    for i, j in itertools.combinations(range(1, k + 1), 2):
        listed = by_pair.get((i, j), [])
        dom = {(e.id, f.id) for e in skeleton.edges if e.color == i
               for f in skeleton.edges if f.color == j and e.source == f.range}
        cod = {(f.id, e.id) for f in skeleton.edges if f.color == j
               for e in skeleton.edges if e.color == i and f.source == e.range}
        lefts = [sq.ef for sq in listed]
        rights = [sq.fe for sq in listed]
        issues = []
        if len(set(lefts)) != len(lefts):
            issues.append("a pair (e,f) has several squares")
        if len(set(rights)) != len(rights):
            issues.append("a pair (f_hat,e_hat) is hit twice")
        missing = sorted(dom - set(lefts))
        if missing:
            issues.append(f"no square for {missing}")
        unhit = sorted(cod - set(rights))
        if unhit:
            issues.append(f"never produced: {unhit}")
        if issues:
            problems.append(NotBijective(i, j, "; ".join(issues)))
    if problems:
        raise InvalidKGraph(problems)

    g = KGraph(skeleton, squares, degree_cap)
    if k >= 3:
        problems.extend(_cube_violations(g))
    if problems:
        raise InvalidKGraph(problems)
    return g


def all_normal_forms(g: KGraph, word: Sequence[str]) -> set:
    """Every color-sorted word reachable by any order of adjacent swaps."""
    col = g._color
    seen = set()
    results = set()
    frontier = [tuple(word)]
    while frontier:
        w = frontier.pop()
        if w in seen:
            continue
        seen.add(w)
        moved = False
        for t in range(len(w) - 1):
            if col[w[t]] > col[w[t + 1]]:
                moved = True
                x, y = g._swap[(w[t], w[t + 1])]
                frontier.append(w[:t] + (x, y) + w[t + 2:])
        if not moved:
            results.add(w)
    return results


def _cube_violations(g: KGraph) -> list:
    out = []
    for a, b, c in itertools.combinations(range(1, g.k + 1), 3):
        # words coloured (c, b, a) are the only ones with two reduced sorting orders
        for z in g.skeleton.edges:
            if z.color != c:
                continue
            for y in g._in.get((z.source, b), []):
                for x in g._in.get((g.edges[y].source, a), []):
                    forms = all_normal_forms(g, (z.id, y, x))
                    if len(forms) > 1:
                        out.append(CubeInconsistent((z.id, y, x), tuple(sorted(forms))))
    return out
