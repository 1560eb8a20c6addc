"""Measures on the truncated path spaces and on the boundary.

Conventions: J-degrees m live in N^J, K-depths n in N^K; full degrees are
assembled through the context's :class:`PathSpace`.  Values are floats, or
:class:`ExpPoly` in rational mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import degrees as dg
from .errors import ConstraintViolated, DegreeMismatch, Diverges, OutOfScope
from .exact import to_float
from .kgraph import KGraph, Path
from .pathspace import PathSpace
from .spectral import Dynamics, SpectralData

TOL = 1e-12


@dataclass(frozen=True)
class MeasureContext:
    graph: KGraph
    spectral: SpectralData
    dynamics: Dynamics
    kappa_override: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if not self.dynamics.J:
            raise OutOfScope("J is empty (preferred dynamics): these measures need a nontrivial "
                             "partition; the critical state is not of this form")
        if not self.dynamics.K:
            raise OutOfScope("K is empty: the dynamics are not normalized")
        for j in self.dynamics.J:
            if to_float(self.ratio(j)) >= 1:
                raise ValueError(f"color {j} in J needs e^(-r_j) rho_j < 1")
        for i in self.dynamics.K:
            if abs(to_float(self.ratio(i)) - 1) > 1e-9:
                raise ValueError(f"color {i} in K needs e^(-r_i) rho_i = 1")

    @property
    def exact(self) -> bool:
        return (self.dynamics.exact_r is not None and self.spectral.exact
                and self.kappa_override is None)

    @cached_property
    def space(self) -> PathSpace:
        return PathSpace(self.graph, self.dynamics.J, self.dynamics.K)

    def kappa(self, v: str):
        t = self.spectral.index(v)
        if self.kappa_override is not None:
            return self.kappa_override[t]
        if self.exact:
            return self.spectral.kappa_exact[t]
        return float(self.spectral.kappa[t])

    def rho(self, c: int):
        if self.exact:
            return self.spectral.rho_exact[c - 1]
        return self.spectral.rho[c - 1]

    def weight(self, n: Sequence[int]):
        if self.exact:
            return self.dynamics.weight(n)
        return math.exp(-sum(x * ni for x, ni in zip(self.dynamics.r, n)))

    def ratio(self, c: int):
        """e^{-r_c} rho_c."""
        return self.weight(dg.unit(self.graph.k, c)) * self.rho(c)

    @cached_property
    def C_J(self):
        out = 1
        for j in self.dynamics.J:
            out = out * (1 - self.ratio(j))
        return out


def make_context(g: KGraph, s: SpectralData, dyn: Dynamics) -> MeasureContext:
    return MeasureContext(g, s, dyn)


@dataclass(frozen=True)
class LevelMeasure:
    m: Tuple[int, ...]
    n: Tuple[int, ...]
    table: Dict[Path, object]

    def total(self):
        return sum(self.table.values())


def level_measure(ctx: MeasureContext, m: Sequence[int], n: Sequence[int]) -> LevelMeasure:
    """nu^{m,n} on the finite set Lambda^{m,n}."""
    sp = ctx.space
    w = ctx.weight(sp.degree(m, n)) * ctx.C_J
    table = {lam: w * ctx.kappa(lam.source) for lam in sp.level_paths(m, n)}
    return LevelMeasure(tuple(m), tuple(n), table)


def level_total_mass(ctx: MeasureContext, m: Sequence[int]):
    """Closed form e^{-r.(m,0)} rho^{(m,0)} C_J of the level-m mass."""
    out = ctx.C_J
    for j, mj in zip(ctx.dynamics.J, m):
        out = out * ctx.ratio(j) ** mj
    return out


def nu_cylinder(ctx: MeasureContext, m: Sequence[int], lam: Path):
    mJ, _ = ctx.space.split(lam.degree)
    if mJ != tuple(m):
        raise DegreeMismatch(f"d({lam})_J = {mJ} but the level is {tuple(m)}")
    return ctx.weight(lam.degree) * ctx.C_J * ctx.kappa(lam.source)


@dataclass(frozen=True)
class ConsistencyReport:
    m: Tuple[int, ...]
    n: Tuple[int, ...]
    p: Tuple[int, ...]
    checked: int
    max_discrepancy: float
    failures: int

    @property
    def ok(self) -> bool:
        return self.failures == 0


def consistency_check(ctx: MeasureContext, m, n, p, tol: float = TOL) -> ConsistencyReport:
    """Push nu^{m,p} forward along restriction and compare with nu^{m,n} pointwise."""
    m, n, p = tuple(m), tuple(n), tuple(p)
    if not dg.leq(n, p):
        raise ValueError("need n <= p")
    coarse = level_measure(ctx, m, n).table
    fine = level_measure(ctx, m, p).table
    sp = ctx.space
    worst, bad = 0.0, 0
    for lam, value in coarse.items():
        pushed = sum(fine[x] for x in sp.fiber(lam, p))
        gap = abs(to_float(pushed - value))
        worst = max(worst, gap)
        if gap > tol:
            bad += 1
    return ConsistencyReport(m, n, p, len(coarse), worst, bad)


class LevelSum(NamedTuple):
    partial: object
    closed: object
    tail_bound: float


def level_sum(ctx: MeasureContext, lam: Path, L_max, tol: float = TOL) -> LevelSum:
    """Sum of nu^l(Z(lam)) over d(lam)_J <= l <= L_max, against the full series."""
    sp = ctx.space
    J = ctx.dynamics.J
    m, n = sp.split(lam.degree)
    L = (L_max,) * len(J) if isinstance(L_max, int) else tuple(L_max)
    closed = ctx.weight(lam.degree) * ctx.kappa(lam.source)
    partial = 0
    if dg.leq(m, L):
        base = ctx.C_J * ctx.kappa(lam.source)
        for l in dg.box(dg.sub(L, m)):
            level = dg.add(m, l)
            term = ctx.weight(sp.degree(level, n)) * base
            for j, lj in zip(J, l):
                term = term * ctx.rho(j) ** lj
            partial = partial + term
    keep = 1.0
    for j, mj, Lj in zip(J, m, L):
        q = to_float(ctx.ratio(j))
        keep *= 1.0 - q ** max(Lj - mj + 1, 0)
    tail = to_float(closed) * (1.0 - keep)
    gap = to_float(closed - partial)
    if gap < -tol or gap > tail + tol * max(1.0, to_float(closed)):
        raise AssertionError(f"level sum for {lam}: gap {gap} outside [0, {tail}]")
    return LevelSum(partial, closed, tail)


def mu_cylinder(ctx: MeasureContext, lam: Path):
    return ctx.weight(lam.degree) * ctx.kappa(lam.source)


@dataclass(frozen=True)
class CheckReport:
    name: str
    checked: int
    max_discrepancy: float
    ok: bool
    detail: str = ""


def quasi_invariance_check(ctx: MeasureContext, r: Optional[Sequence[float]] = None,
                           cap: Optional[Sequence[int]] = None, tol: float = TOL) -> CheckReport:
    """mu(Z(lam)) against e^{-r.d(lam)} mu(Z(s(lam))) with the cocycle rate r."""
    g = ctx.graph
    cap = tuple(cap) if cap is not None else g.degree_cap
    rates = tuple(r) if r is not None else None
    worst, count = 0.0, 0
    for lam in g.paths_upto(None, cap):
        lhs = mu_cylinder(ctx, lam)
        if rates is None:
            cocycle = ctx.weight(lam.degree)
        else:
            cocycle = math.exp(-sum(x * d for x, d in zip(rates, lam.degree)))
        rhs = cocycle * mu_cylinder(ctx, g.vertex(lam.source))
        worst = max(worst, abs(to_float(lhs - rhs)))
        count += 1
    return CheckReport("quasi-invariance", count, worst, worst <= tol)


def support_eigen_check(ctx: MeasureContext, tol: float = 1e-9) -> CheckReport:
    """A_l m = e^{r_l} m on K and A_j m < e^{r_j} m on J, with m_v = mu(Z(v))."""
    g = ctx.graph
    mvec = np.array([to_float(mu_cylinder(ctx, g.vertex(v))) for v in g.vertices])
    worst, ok, notes = 0.0, True, []
    for c, A in enumerate(ctx.spectral.matrices.A, start=1):
        lhs = A.astype(float) @ mvec
        rhs = math.exp(ctx.dynamics.r[c - 1]) * mvec
        if c in ctx.dynamics.K:
            gap = float(np.max(np.abs(lhs - rhs)))
            worst = max(worst, gap)
            if gap > tol * max(1.0, float(np.max(rhs))):
                ok = False
                notes.append(f"color {c}: eigen-equation off by {gap:.3g}")
        elif not (lhs < rhs).all():
            ok = False
            notes.append(f"color {c}: strict subinvariance fails")
    return CheckReport("support eigen-check", g.k, worst, ok, "; ".join(notes))


# -- supercritical regime ---------------------------------------------------

class YVector(NamedTuple):
    y: np.ndarray
    tail_bound: np.ndarray


def path_series(s: SpectralData, r: Sequence[float], beta: float, x: np.ndarray,
                transpose: bool = False, cap=60) -> np.ndarray:
    """sum over n <= cap of e^{-beta r.n} M^n x, with M = A or A^T colorwise."""
    cap = (cap,) * len(r) if isinstance(cap, int) else tuple(cap)
    vec = np.asarray(x, dtype=float)
    for rate, A, L in zip(r, s.matrices.A, cap):
        B = math.exp(-beta * float(rate)) * (A.T if transpose else A).astype(float)
        acc, term = vec.copy(), vec.copy()
        for _ in range(L):
            term = B @ term
            acc += term
        vec = acc
    return vec


def y_vector(s: SpectralData, r: Sequence[float], beta: float, cap=60) -> YVector:
    """y_v = sum over lam with source v of e^{-beta r.d(lam)}, truncated at d(lam) <= cap.

    Paths with source v at degree n number (1^T A^n)_v, so this is the
    series in A^T; eps.y = 1 is then exactly phi_eps(1) = 1.
    """
    r = [float(x) for x in r]
    cap = (cap,) * len(r) if isinstance(cap, int) else tuple(cap)
    q = [math.exp(-beta * x) * p for x, p in zip(r, s.rho)]
    if any(qi >= 1 for qi in q):
        raise Diverges(f"beta = {beta} is not above the critical inverse temperature")
    vec = path_series(s, r, beta, np.ones(len(s.matrices.vertices)), transpose=True, cap=cap)
    # 1^T A^n e_v <= rho^n / kappa_v
    tail = _geometric_tail(s, r, beta, cap) * float(s.kappa.min()) / s.kappa
    return YVector(vec, tail)


def check_eps(y: np.ndarray, eps: Sequence[float], tol: float = 1e-9) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    if (eps < 0).any() or abs(float(eps @ y) - 1) > tol:
        raise ConstraintViolated(f"eps . y = {float(eps @ y)!r}, expected 1")
    return eps


def default_eps(y: np.ndarray) -> np.ndarray:
    return np.full(len(y), 1.0 / float(y.sum()))


class AtomicMeasure(NamedTuple):
    table: Dict[Path, float]
    partial_mass: float
    tail_bound: float


def supercritical_measure(g: KGraph, s: SpectralData, r: Sequence[float], beta: float,
                          eps: Optional[Sequence[float]] = None, cap=None) -> AtomicMeasure:
    """Point masses e^{-beta r.d(lam)} eps_{s(lam)} on Lambda up to the cap."""
    if beta <= 1:
        raise Diverges("the atomic measures need beta above the critical value 1")
    yv = y_vector(s, r, beta)
    eps = check_eps(yv.y, default_eps(yv.y) if eps is None else eps)
    cap = tuple(cap) if cap is not None else g.degree_cap
    idx = {v: t for t, v in enumerate(g.vertices)}
    table = {}
    for lam in g.paths_upto(None, cap):
        table[lam] = math.exp(-beta * sum(x * d for x, d in zip(r, lam.degree))) * eps[idx[lam.source]]
    mass = math.fsum(table.values())
    tail = _geometric_tail(s, r, beta, cap) * float(eps.max())
    # the untruncated measure has total mass eps.y = 1
    if not -1e-12 <= 1.0 - mass <= tail + 1e-12:
        raise AssertionError(f"missing mass {1.0 - mass} exceeds the tail bound {tail}")
    return AtomicMeasure(table, mass, tail)


def _geometric_tail(s: SpectralData, r: Sequence[float], beta: float, cap: Sequence[int]) -> float:
    """Bound on sum over n outside the box of e^{-beta r.n} 1^T A^n x, for x <= 1."""
    full = kept = 1.0
    for x, p, L in zip(r, s.rho, cap):
        q = math.exp(-beta * float(x)) * p
        full /= 1 - q
        kept *= (1 - q ** (L + 1)) / (1 - q)
    return (full - kept) / float(s.kappa.min())
