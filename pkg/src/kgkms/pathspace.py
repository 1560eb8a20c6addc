"""Truncations Lambda^{m,n} of the semi-infinite path space and cylinder sets.

A degree is split into its J-block m (finite directions) and K-block n
(directions that run off to infinity).  Semi-infinite paths are only ever
handled through finite truncations.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from . import degrees as dg
from .errors import OutOfRange
from .kgraph import KGraph, Path


class Membership(enum.Enum):
    IN = "In"
    OUT = "Out"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class CylinderSpec:
    """Z(base minus excluded) = Z(base) without the Z(base.alpha), alpha in excluded."""

    base: Path
    excluded: Tuple[Path, ...] = ()

    def __post_init__(self):
        for alpha in self.excluded:
            if alpha.range != self.base.source:
                raise ValueError(f"excluded path {alpha} does not start at s({self.base})")


class PathSpace:
    def __init__(self, g: KGraph, J: Sequence[int], K: Sequence[int]):
        self.g = g
        self.J = tuple(J)
        self.K = tuple(K)
        if sorted(self.J + self.K) != list(range(1, g.k + 1)):
            raise ValueError("J and K must partition the colors")

    def degree(self, m: Sequence[int], n: Sequence[int]) -> dg.Degree:
        return dg.assemble(m, n, self.J, self.K)

    def split(self, d: Sequence[int]) -> Tuple[dg.Degree, dg.Degree]:
        return dg.split(d, self.J, self.K)

    def level_paths(self, m: Sequence[int], n: Sequence[int]) -> Tuple[Path, ...]:
        d = self.degree(m, n)
        self.g.check_cap(d)
        return self.g.paths(None, d)

    def restrict(self, lam: Path, n: Sequence[int]) -> Path:
        m, p = self.split(lam.degree)
        if not dg.leq(n, p):
            raise OutOfRange(f"cannot restrict K-depth {p} to {tuple(n)}")
        return self.g.segment(lam, dg.zero(self.g.k), self.degree(m, n))

    def fiber(self, lam: Path, p: Sequence[int]) -> List[Path]:
        m, n = self.split(lam.degree)
        if not dg.leq(n, p):
            raise OutOfRange(f"fiber depth {tuple(p)} below {n}")
        self.g.check_cap(self.degree(m, p))
        step = self.degree(dg.zero(len(self.J)), dg.sub(p, n))
        return [self.g.compose(lam, alpha) for alpha in self.g.paths(lam.source, step)]

    # -- cylinders -----------------------------------------------------------

    def _agree(self, x: Path, lam: Path) -> bool:
        """Do x and lam agree on their common initial segment?"""
        if x.range != lam.range:
            return False
        a = dg.meet(x.degree, lam.degree)
        z = dg.zero(self.g.k)
        return self.g.segment(x, z, a) == self.g.segment(lam, z, a)

    def cylinder_member(self, x: Path, spec: CylinderSpec) -> Membership:
        """Decide x in Z(spec) where x is a truncation of a longer path."""
        lam = spec.base
        if not self._agree(x, lam):
            return Membership.OUT
        if not dg.leq(lam.degree, x.degree):
            return Membership.UNDETERMINED
        verdict = Membership.IN
        for alpha in spec.excluded:
            la = self.g.compose(lam, alpha)
            if not self._agree(x, la):
                continue
            if dg.leq(la.degree, x.degree):
                return Membership.OUT
            verdict = Membership.UNDETERMINED
        return verdict

    def cylinder_meet(self, sigma: Path, tau: Path, window: Optional[Sequence[int]] = None) -> Tuple[Path, ...]:
        """Z(sigma) & Z(tau) as a disjoint union of Z(pi); empty tuple means Empty.

        With a window m (in N^J) only cylinders that meet Lambda^{m, infinity_K}
        are kept, i.e. those with d(pi)_J <= m.
        """
        out = self.g.mce(sigma, tau)
        if window is not None:
            out = tuple(pi for pi in out if dg.leq(self.split(pi.degree)[0], window))
        return out

    def refine_cylinder(self, spec: CylinderSpec, m: Sequence[int]) -> Tuple[dg.Degree, List[Path]]:
        """Cover Z(spec) & Lambda^{m, infinity_K} by pure cylinders of degree (m, n).

        n is the join of d(base)_K and d(base.alpha)_K over the excluded alpha
        whose cylinders meet the window.  Returns (n, paths sigma of degree
        (m, n) lying in Z(spec)).
        """
        tau = spec.base
        tJ, tK = self.split(tau.degree)
        if not dg.leq(tJ, m):
            return tK, []
        n = tK
        relevant = []
        for alpha in spec.excluded:
            aJ, aK = self.split(self.g.compose(tau, alpha).degree)
            # excluded cylinders with a larger J-degree miss the window entirely
            if dg.leq(aJ, m):
                n = dg.join(n, aK)
                relevant.append(alpha)
        window_spec = CylinderSpec(tau, tuple(relevant))
        sigmas = []
        for sigma in self.level_paths(m, n):
            verdict = self.cylinder_member(sigma, window_spec)
            if verdict is Membership.UNDETERMINED:
                raise AssertionError("refinement depth failed to decide membership")
            if verdict is Membership.IN:
                sigmas.append(sigma)
        return n, sigmas
