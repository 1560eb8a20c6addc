"""Generators for example k-graphs."""

from __future__ import annotations

import itertools
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import BadParams
from .kgraph import Edge, Skeleton, Square

PREFIX = "afghpqxyz"


def _eid(color: int, idx: int) -> str:
    return f"{PREFIX[color - 1]}{idx}"


def single_vertex(n1: int, n2: int, shift: int = 1) -> Tuple[Skeleton, List[Square]]:
    """One vertex, n1 blue loops a*, n2 red loops f*, squares a_i.f_j = f_{j+shift*i}.a_i.

    Red indices are taken mod n2; ``shift=0`` makes the two colors commute.
    For each blue edge the squares permute the red edges, so a blue edge and
    a red edge always have exactly one minimal common extension.
    """
    if n1 < 1 or n2 < 1:
        raise BadParams("N1 and N2 must be >= 1")
    edges = [Edge(_eid(1, i), 1, "v", "v") for i in range(n1)]
    edges += [Edge(_eid(2, j), 2, "v", "v") for j in range(n2)]
    squares = [Square(1, 2, (_eid(1, i), _eid(2, j)), (_eid(2, (j + shift * i) % n2), _eid(1, i)))
               for i in range(n1) for j in range(n2)]
    return Skeleton(2, ("v",), tuple(edges)), squares


def cube(loops: Sequence[int]) -> Tuple[Skeleton, List[Square]]:
    """Single-vertex product of k one-vertex 1-graphs (all squares commute)."""
    k = len(loops)
    if k < 1 or any(n < 1 for n in loops):
        raise BadParams("need at least one color and every loop count >= 1")
    if k > len(PREFIX):
        raise BadParams(f"at most {len(PREFIX)} colors supported")
    edges = [Edge(_eid(c, t), c, "v", "v") for c in range(1, k + 1) for t in range(loops[c - 1])]
    squares = []
    for i, j in itertools.combinations(range(1, k + 1), 2):
        for s in range(loops[i - 1]):
            for t in range(loops[j - 1]):
                squares.append(Square(i, j, (_eid(i, s), _eid(j, t)), (_eid(j, t), _eid(i, s))))
    return Skeleton(k, ("v",), tuple(edges)), squares


def product_of_cycles(length: int, k: int = 2) -> Tuple[Skeleton, List[Square]]:
    """Every color is the same directed cycle on ``length`` vertices."""
    if length < 1 or k < 1:
        raise BadParams("length and rank must be >= 1")
    if k > len(PREFIX):
        raise BadParams(f"at most {len(PREFIX)} colors supported")
    verts = tuple(f"v{t}" for t in range(length))
    edges = [Edge(_eid(c, t), c, verts[t], verts[(t + 1) % length])
             for c in range(1, k + 1) for t in range(length)]
    squares = []
    for i, j in itertools.combinations(range(1, k + 1), 2):
        for t in range(length):
            u = (t + 1) % length
            squares.append(Square(i, j, (_eid(i, t), _eid(j, u)), (_eid(j, t), _eid(i, u))))
    return Skeleton(k, verts, tuple(edges)), squares


def from_matrices(mats: Sequence, vertices: Sequence[str] | None = None) -> Tuple[Skeleton, List[Square]]:
    """Edges from vertex matrices A_c(v, w) = #color-c edges with range v, source w.

    Squares pair the two sides of each (range, source) block in sorted order.
    For rank >= 3 that matching need not be cube consistent; validation says so.
    """
    mats = [np.asarray(m, dtype=np.int64) for m in mats]
    k = len(mats)
    nv = mats[0].shape[0]
    if any(m.shape != (nv, nv) for m in mats) or any((m < 0).any() for m in mats):
        raise BadParams("matrices must be square, equal-sized and non-negative")
    verts = tuple(vertices) if vertices is not None else tuple(f"v{t}" for t in range(nv))
    edges: List[Edge] = []
    for c, m in enumerate(mats, start=1):
        count = 0
        for a in range(nv):
            for b in range(nv):
                for _ in range(int(m[a, b])):
                    edges.append(Edge(_eid(c, count), c, verts[a], verts[b]))
                    count += 1
    into: Dict[Tuple[str, int], List[Edge]] = {}
    for e in edges:
        into.setdefault((e.range, e.color), []).append(e)
    squares = []
    for i, j in itertools.combinations(range(1, k + 1), 2):
        blocks_ef: Dict[Tuple[str, str], list] = {}
        blocks_fe: Dict[Tuple[str, str], list] = {}
        for e in edges:
            if e.color == i:
                for f in into.get((e.source, j), []):
                    blocks_ef.setdefault((e.range, f.source), []).append((e.id, f.id))
            if e.color == j:
                for x in into.get((e.source, i), []):
                    blocks_fe.setdefault((e.range, x.source), []).append((e.id, x.id))
        for key, left in blocks_ef.items():
            right = blocks_fe.get(key, [])
            if len(left) != len(right):
                raise BadParams(f"A_{i}A_{j} != A_{j}A_{i} at {key}")
            for ef, fe in zip(sorted(left), sorted(right)):
                squares.append(Square(i, j, ef, fe))
    return Skeleton(k, verts, tuple(edges)), squares


def periodic_rank3() -> Tuple[Skeleton, List[Square]]:
    """One vertex; colors 2 and 3 have two loops each glued by b_i.c_j = c_i.b_j.

    Paths in colors 2, 3 are then just index strings, so b_i.y = c_i.y for
    every infinite y: the graph is periodic in the (2, 3) directions.
    Color 1 has two loops commuting with everything.
    """
    edges = [Edge(_eid(c, t), c, "v", "v") for c in (1, 2, 3) for t in range(2)]
    squares = []
    for s in range(2):
        for t in range(2):
            squares.append(Square(1, 2, (_eid(1, s), _eid(2, t)), (_eid(2, t), _eid(1, s))))
            squares.append(Square(1, 3, (_eid(1, s), _eid(3, t)), (_eid(3, t), _eid(1, s))))
            squares.append(Square(2, 3, (_eid(2, s), _eid(3, t)), (_eid(3, s), _eid(2, t))))
    return Skeleton(3, ("v",), tuple(edges)), squares


def twisted_cube() -> Tuple[Skeleton, List[Square]]:
    """Three colors, two loops each, with squares that fail cube consistency.

    a_i.f_j = f_j.a_{i+j}, f_j.g_l = g_l.f_{j+l} (indices mod 2), colors 1 and 3
    commute.  Sorting g f a the two possible ways gives a indices differing by l.
    """
    edges = [Edge(_eid(c, t), c, "v", "v") for c in (1, 2, 3) for t in range(2)]
    squares = []
    for s in range(2):
        for t in range(2):
            squares.append(Square(1, 2, (_eid(1, s), _eid(2, t)), (_eid(2, t), _eid(1, (s + t) % 2))))
            squares.append(Square(1, 3, (_eid(1, s), _eid(3, t)), (_eid(3, t), _eid(1, s))))
            squares.append(Square(2, 3, (_eid(2, s), _eid(3, t)), (_eid(3, t), _eid(2, (s + t) % 2))))
    return Skeleton(3, ("v",), tuple(edges)), squares


TWO_VERTEX = ([[0, 1], [2, 1]], [[1, 1], [2, 2]])
THREE_VERTEX = ([[0, 1, 0], [0, 0, 1], [1, 1, 0]], [[1, 1, 0], [0, 1, 1], [1, 1, 1]])


def named(name: str, **params) -> Tuple[Skeleton, List[Square]]:
    """Dispatch used by the CLI ``example`` command."""
    try:
        if name == "single-vertex":
            return single_vertex(int(params.get("n1", 2)), int(params.get("n2", 3)),
                                 int(params.get("shift", 1)))
        if name == "cube":
            return cube([int(x) for x in str(params.get("loops", "2,2,2")).split(",")])
        if name == "product-of-cycles":
            return product_of_cycles(int(params.get("length", 3)), int(params.get("rank", 2)))
        if name == "two-vertex":
            return from_matrices(TWO_VERTEX)
        if name == "three-vertex":
            return from_matrices(THREE_VERTEX)
        if name == "periodic-rank3":
            return periodic_rank3()
        if name == "twisted-cube":
            return twisted_cube()
    except ValueError as exc:
        raise BadParams(str(exc)) from None
    raise BadParams(f"unknown example {name!r}; choose from {', '.join(NAMES)}")


NAMES = ("single-vertex", "cube", "product-of-cycles", "two-vertex", "three-vertex",
         "periodic-rank3", "twisted-cube")
