"""Finite exhaustive sets, satiation membership and the relative CK identity.

Deciding exhaustiveness at one degree: let D be the join of the degrees in
E.  Every mu in v.Lambda extends (no sources) to some mu' of degree >= D,
and a common extension of mu' with lam exists iff mu'(0, d(lam)) = lam
because d(mu') >= d(lam).  Common extensions of mu' are common extensions
of mu, so it suffices to test every mu in v.Lambda^D for a prefix in E.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Tuple

from . import degrees as dg
from .kgraph import KGraph, Path
from .toeplitz import ToeplitzElement


@dataclass(frozen=True)
class ExhaustiveCandidate:
    v: str
    E: Tuple[Path, ...]

    def __post_init__(self):
        for lam in self.E:
            if lam.range != self.v:
                raise ValueError(f"{lam} does not have range {self.v}")


def candidate(v: str, E: Iterable[Path]) -> ExhaustiveCandidate:
    return ExhaustiveCandidate(v, tuple(E))


def is_finite_exhaustive(g: KGraph, c: ExhaustiveCandidate) -> bool:
    if not c.E:
        return False
    D = reduce(dg.join, (lam.degree for lam in c.E))
    g.check_cap(D)
    z = dg.zero(g.k)
    members = set(c.E)
    for mu in g.paths(c.v, D):
        if not any(g.segment(mu, z, lam.degree) in members for lam in c.E):
            return False
    return True


def satiation_membership(g: KGraph, c: ExhaustiveCandidate, K: Sequence[int]) -> bool:
    """Is G & d^{-1}(N^K) finite exhaustive?"""
    K = set(K)
    part = tuple(lam for lam in c.E
                 if all(d == 0 for col, d in enumerate(lam.degree, start=1) if col not in K))
    return is_finite_exhaustive(g, ExhaustiveCandidate(c.v, part))


def relative_ck_identity(g: KGraph, v: str, i: int) -> ToeplitzElement:
    """prod_e (t_v - t_e t_e^*) minus (t_v - sum_e t_e t_e^*); zero when the identity holds."""
    tv = g.vertex(v)
    pv = ToeplitzElement.span(g, tv, tv)
    edges = g.paths(v, dg.unit(g.k, i))
    product = pv
    total = pv
    for e in edges:
        proj = ToeplitzElement.span(g, e, e)
        product = product * (pv - proj)
        total = total - proj
    return product - total
