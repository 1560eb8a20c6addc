"""Multidegrees in N^k, stored as plain tuples of ints.

Colors are numbered 1..k everywhere in the public API; tuple positions are
0-based, so color ``i`` lives at index ``i - 1``.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence, Tuple

Degree = Tuple[int, ...]


def zero(k: int) -> Degree:
    return (0,) * k


def unit(k: int, color: int) -> Degree:
    return tuple(1 if c == color else 0 for c in range(1, k + 1))


def leq(m: Sequence[int], n: Sequence[int]) -> bool:
    return all(a <= b for a, b in zip(m, n))


def join(m: Sequence[int], n: Sequence[int]) -> Degree:
    return tuple(max(a, b) for a, b in zip(m, n))


def meet(m: Sequence[int], n: Sequence[int]) -> Degree:
    return tuple(min(a, b) for a, b in zip(m, n))


def add(m: Sequence[int], n: Sequence[int]) -> Degree:
    return tuple(a + b for a, b in zip(m, n))


def sub(m: Sequence[int], n: Sequence[int]) -> Degree:
    return tuple(a - b for a, b in zip(m, n))


def total(n: Sequence[int]) -> int:
    return sum(n)


def box(n: Sequence[int]) -> Iterator[Degree]:
    """All m with 0 <= m <= n, in lexicographic order."""
    return itertools.product(*(range(c + 1) for c in n))


def colors_of(n: Sequence[int]) -> list:
    """The sorted color sequence of a canonical word of degree n."""
    out = []
    for idx, c in enumerate(n):
        out.extend([idx + 1] * c)
    return out


def split(n: Sequence[int], J: Sequence[int], K: Sequence[int]) -> tuple:
    """Split n into its (J-block, K-block); colors are 1-based."""
    return tuple(n[j - 1] for j in J), tuple(n[i - 1] for i in K)


def assemble(nJ: Sequence[int], nK: Sequence[int], J: Sequence[int], K: Sequence[int]) -> Degree:
    """Inverse of :func:`split`."""
    k = len(J) + len(K)
    out = [0] * k
    for j, v in zip(J, nJ):
        out[j - 1] = v
    for i, v in zip(K, nK):
        out[i - 1] = v
    return tuple(out)


def parse(text: str, k: int) -> Degree:
    """Parse "2,2" or a single broadcast integer "3"."""
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    values = [int(p) for p in parts]
    if len(values) == 1:
        values = values * k
    if len(values) != k or any(v < 0 for v in values):
        raise ValueError(f"expected {k} non-negative integers, got {text!r}")
    return tuple(values)
