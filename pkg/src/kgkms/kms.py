"""KMS states on the Toeplitz algebra and the checks built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import mpmath
import numpy as np

from . import degrees as dg
from .errors import Diverges, KGraphIsCycle, OutOfScope, PreconditionViolated
from .exact import ExactRate, to_float
from .kgraph import KGraph, Path
from .measures import (MeasureContext, _geometric_tail, check_eps, default_eps, level_sum,
                       path_series, y_vector)
from .spectral import Dynamics, SpectralData
from .toeplitz import ToeplitzElement, gauge_expectation, imaginary_dynamics, multiply

__all__ = [
    "CriticalState", "SupercriticalState", "critical_state", "supercritical_state",
    "phi_critical", "phi_spatial", "phi_supercritical", "phi_supercritical_truncated",
    "phi_supercritical_table", "evaluate",
    "kms_check", "kms_sweep", "ck_defect", "psi_offdiagonal_bound", "notunique_lower_bound",
    "Bracket", "rational_independence", "y_vector",
]


# -- states -----------------------------------------------------------------

@dataclass(frozen=True)
class CriticalState:
    """phi(t_s t_t^*) = delta_{s,t} e^{-r.d(s)} kappa_{s(s)} for normalized r."""

    graph: KGraph
    spectral: SpectralData
    dynamics: Dynamics

    def __post_init__(self):
        if not self.dynamics.K:
            raise PreconditionViolated("the critical state needs a nonempty K")

    beta = 1

    @property
    def exact(self) -> bool:
        return self.dynamics.exact_r is not None and self.spectral.exact

    @property
    def rates(self):
        return self.dynamics.exact_r if self.exact else self.dynamics.r

    def kappa(self, v: str):
        t_ = self.spectral.index(v)
        return self.spectral.kappa_exact[t_] if self.exact else float(self.spectral.kappa[t_])

    def weight(self, n: Sequence[int]):
        if self.exact:
            return self.dynamics.weight(n)
        return math.exp(-sum(x * ni for x, ni in zip(self.dynamics.r, n)))

    def diagonal(self, lam: Path):
        return self.weight(lam.degree) * self.kappa(lam.source)

    @cached_property
    def context(self) -> MeasureContext:
        return MeasureContext(self.graph, self.spectral, self.dynamics)


def critical_state(g: KGraph, s: SpectralData, dyn: Dynamics) -> CriticalState:
    return CriticalState(g, s, dyn)


@dataclass(frozen=True)
class SupercriticalState:
    """phi_eps(a) = sum over lam of <a h_lam, h_lam> e^{-beta r.d(lam)} eps_{s(lam)}.

    ``cap`` bounds the explicit enumeration used by the tabulated cross-check;
    ``series_cap`` truncates the matrix series behind :meth:`diagonal`.
    """

    graph: KGraph
    spectral: SpectralData
    dynamics: Dynamics
    beta: float
    eps: np.ndarray
    y: np.ndarray
    cap: Tuple[int, ...]
    series_cap: int = 60

    @property
    def rates(self):
        return self.dynamics.r

    def weight(self, n: Sequence[int]) -> float:
        return math.exp(-self.beta * sum(x * ni for x, ni in zip(self.dynamics.r, n)))

    def eps_at(self, v: str) -> float:
        return float(self.eps[self.spectral.index(v)])

    def tail_from(self, nu: Path, cap: Optional[Sequence[int]] = None) -> float:
        """Bound on the weight of Z(nu) beyond nu.omega with d(omega) <= cap."""
        cap = self.cap if cap is None else tuple(cap)
        kap = float(self.spectral.kappa[self.spectral.index(nu.source)])
        return (self.weight(nu.degree) * float(self.eps.max()) * kap
                * _geometric_tail(self.spectral, self.dynamics.r, self.beta, cap))

    @cached_property
    def z(self) -> np.ndarray:
        """z_u = sum over omega with range u of e^{-beta r.d(omega)} eps_{s(omega)}."""
        return path_series(self.spectral, self.dynamics.r, self.beta, self.eps, cap=self.series_cap)

    def diagonal(self, lam: Path) -> float:
        return self.weight(lam.degree) * float(self.z[self.spectral.index(lam.source)])

    def diagonal_tail(self, lam: Path) -> float:
        return self.tail_from(lam, (self.series_cap,) * self.graph.k)


def supercritical_state(g: KGraph, s: SpectralData, dyn: Dynamics, beta: float,
                        eps: Optional[Sequence[float]] = None, cap=None,
                        y_cap: int = 60) -> SupercriticalState:
    if beta <= 1:
        raise Diverges(f"beta = {beta} is not above the critical value 1")
    yv = y_vector(s, dyn.r, beta, y_cap)
    e = check_eps(yv.y, default_eps(yv.y) if eps is None else eps)
    cap = tuple(cap) if cap is not None else g.degree_cap
    return SupercriticalState(g, s, dyn, float(beta), e, yv.y, cap, y_cap)


# -- evaluation -------------------------------------------------------------

def phi_critical(state: CriticalState, a: ToeplitzElement):
    out = 0
    for (mu, nu), c in a.terms.items():
        if mu == nu:
            out = out + c * state.diagonal(mu)
    return out


def phi_spatial(state: CriticalState, a: ToeplitzElement, L_max=40) -> Tuple[float, float]:
    """Integrate the gauge-averaged element against the level measures nu^m.

    Each surviving term reduces to level sums over the cylinders making up
    Z(sigma) & Z(tau).  Returns (partial value, tail bound).
    """
    ctx = state.context
    sp = ctx.space
    value, tail = 0.0, 0.0
    for (sigma, tau), c in gauge_expectation(a).terms.items():
        if sp.split(sigma.degree)[0] != sp.split(tau.degree)[0]:
            continue
        for pi in sp.cylinder_meet(sigma, tau):
            ls = level_sum(ctx, pi, L_max)
            value += to_float(c * ls.partial) if not isinstance(c, complex) else c * to_float(ls.partial)
            tail += abs(c) * ls.tail_bound
    return value, tail


def _supercritical_coefficient(g: KGraph, mu: Path, nu: Path, lam: Path) -> bool:
    """<t_mu t_nu^* h_lam, h_lam> for lam in Z(nu)."""
    omega = g.segment(lam, nu.degree, lam.degree)
    if dg.add(mu.degree, omega.degree) != lam.degree:
        return False
    return g.compose(mu, omega) == lam


def phi_supercritical(state: SupercriticalState, a: ToeplitzElement) -> Tuple[float, float]:
    """(value, tail bound) of phi_eps on a.

    T_mu^* h_lam = T_nu^* h_lam != 0 forces d(mu) = d(nu), and then mu = nu
    since both are initial segments of lam.  So only diagonal terms count,
    each worth e^{-beta r.d(mu)} z_{s(mu)}.
    """
    value, tail = 0.0, 0.0
    for (mu, nu), c in a.terms.items():
        if mu == nu:
            value += c * state.diagonal(mu)
            tail += abs(c) * state.diagonal_tail(mu)
    return value, tail


def phi_supercritical_truncated(state: SupercriticalState, a: ToeplitzElement) -> Tuple[float, float]:
    """Direct sum over lam = nu.omega with d(omega) <= cap; returns (value, tail)."""
    g = state.graph
    value, tail = 0.0, 0.0
    for (mu, nu), c in a.terms.items():
        part = 0.0
        for omega in g.paths_upto(nu.source, state.cap):
            lam = g.compose(nu, omega)
            if _supercritical_coefficient(g, mu, nu, lam):
                part += state.weight(lam.degree) * state.eps_at(lam.source)
        value += c * part
        tail += abs(c) * state.tail_from(nu)
    return value, tail


def phi_supercritical_table(state: SupercriticalState, max_degree: Sequence[int]
                            ) -> Dict[Tuple[Path, Path], Tuple[float, float]]:
    """phi_eps on every nonzero spanning term of degree <= max_degree.

    Walks lam once over Lambda^{<= max_degree + cap} and reads off the pairs
    (mu, nu) with T_mu^* h_lam = T_nu^* h_lam != 0; the truncation agrees with
    :func:`phi_supercritical`.  Terms absent from the table have value 0.
    """
    g = state.graph
    D = tuple(max_degree)
    z = dg.zero(g.k)
    acc: Dict[Tuple[Path, Path], float] = {}
    for lam in g.paths_upto(None, dg.add(D, state.cap)):
        mass = state.weight(lam.degree) * state.eps_at(lam.source)
        images = []
        for p in dg.box(dg.meet(D, lam.degree)):
            if not dg.leq(dg.sub(lam.degree, p), state.cap):
                continue
            images.append((g.segment(lam, z, p), g.segment(lam, p, lam.degree)))
        for mu, hm in images:
            for nu, hn in images:
                if hm == hn:
                    acc[(mu, nu)] = acc.get((mu, nu), 0.0) + mass
    return {key: (val, state.tail_from(key[1])) for key, val in acc.items()}


def evaluate(state, a: ToeplitzElement) -> Tuple[object, float]:
    """(value, tail bound) for either kind of state."""
    if isinstance(state, CriticalState):
        return phi_critical(state, a), 0.0
    return phi_supercritical(state, a)


class KMSResidual(NamedTuple):
    residual: float
    tail_bound: float


def kms_check(state, a: ToeplitzElement, b: ToeplitzElement, beta=None) -> KMSResidual:
    """|phi(ab) - phi(b alpha_{i beta}(a))| together with the truncation allowance."""
    beta = state.beta if beta is None else beta
    lhs, t1 = evaluate(state, multiply(a, b))
    rhs, t2 = evaluate(state, multiply(b, imaginary_dynamics(a, beta, state.rates)))
    return KMSResidual(abs(to_float(lhs - rhs)) if not isinstance(lhs - rhs, complex)
                       else abs(lhs - rhs), t1 + t2)


class SweepResult(NamedTuple):
    pairs: int
    nonzero: int
    max_residual: float
    max_excess: float  # residual minus its truncation allowance
    worst: Optional[tuple]


def kms_sweep(state, max_degree: Sequence[int] = (2, 2)) -> SweepResult:
    """KMS residual over every pair of spanning terms of degree <= max_degree.

    F(mu, nu, sigma, tau) = phi(t_mu t_nu^* t_sigma t_tau^*) is expanded via
    Lambda^min(nu, sigma) and matched against the state's support, so only
    nonzero products are touched.  The condition read on spanning terms is
    F(mu, nu, sigma, tau) = e^{-beta r.(d(mu) - d(nu))} F(sigma, tau, mu, nu).
    """
    g = state.graph
    D = tuple(max_degree)
    P = g.paths_upto(None, D)
    by_source: Dict[str, List[Path]] = {}
    for p in P:
        by_source.setdefault(p.source, []).append(p)
    z = dg.zero(g.k)

    if isinstance(state, CriticalState):
        def support(x: Path):
            return ((x, float(to_float(state.diagonal(x))), 0.0),)
        weight = lambda d: math.exp(-sum(x * di for x, di in zip(state.dynamics.r, d)))
    else:
        def support(x: Path):
            return ((x, state.diagonal(x), state.diagonal_tail(x)),)
        weight = state.weight

    F: Dict[tuple, List[float]] = {}
    for nu in P:
        for sigma in P:
            if sigma.range != nu.range:
                continue
            for eta, zeta in g.lambda_min(nu, sigma):
                for mu in by_source[nu.source]:
                    x = g.compose(mu, eta)
                    for y, val, tl in support(x):
                        if not dg.leq(zeta.degree, y.degree):
                            continue
                        dt = dg.sub(y.degree, zeta.degree)
                        if not dg.leq(dt, D) or g.segment(y, dt, y.degree) != zeta:
                            continue
                        tau = g.segment(y, z, dt)
                        slot = F.setdefault((mu, nu, sigma, tau), [0.0, 0.0])
                        slot[0] += val
                        slot[1] += tl
    worst, excess, where = 0.0, -math.inf, None
    empty = (0.0, 0.0)
    for key in set(F) | {(k[2], k[3], k[0], k[1]) for k in F}:
        mu, nu, sigma, tau = key
        lhs, t1 = F.get(key, empty)
        rhs, t2 = F.get((sigma, tau, mu, nu), empty)
        w = weight(dg.sub(mu.degree, nu.degree)) if mu.degree != nu.degree else 1.0
        res = abs(lhs - w * rhs)
        if res > worst:
            worst, where = res, key
        excess = max(excess, res - (t1 + w * t2))
    n = sum(len(by_source[p.source]) for p in P)
    return SweepResult(n * n, len(F), worst, max(excess, 0.0) if F else 0.0, where)


# -- Cuntz-Krieger defect ---------------------------------------------------

def ck_defect(state: CriticalState, v: str, i: int, tol: float = 1e-12):
    """phi(t_v - sum_{e in v Lambda^{e_i}} t_e t_e^*)."""
    if not state.dynamics.J:
        raise OutOfScope("J is empty (preferred dynamics): the defect table needs a nontrivial J")
    g = state.graph
    tv = g.vertex(v)
    elt = ToeplitzElement.span(g, tv, tv)
    for e in g.paths(v, dg.unit(g.k, i)):
        elt = elt - ToeplitzElement.span(g, e, e)
    value = phi_critical(state, elt)
    val = to_float(value)
    if i in state.dynamics.K:
        if abs(val) > tol:
            raise AssertionError(f"defect at ({v}, {i}) is {val}, expected 0")
    else:
        floor = to_float(state.context.C_J * state.kappa(v))
        if val < floor - tol:
            raise AssertionError(f"defect at ({v}, {i}) is {val} < C_J kappa_v = {floor}")
    return value


# -- |K| = 1: off-diagonal decay --------------------------------------------

def psi_offdiagonal_bound(state: CriticalState, sigma: Path, tau: Path, N_max: int) -> list:
    """Upper bounds u_1 > u_2 > ... on the mass forcing t_sigma t_tau^* to pair nontrivially."""
    dyn = state.dynamics
    if len(dyn.K) != 1:
        raise PreconditionViolated(f"needs |K| = 1, got K = {list(dyn.K)}")
    i = dyn.K[0]
    if state.spectral.rho[i - 1] <= 1 + 1e-12:
        raise KGraphIsCycle(i)
    if sigma == tau:
        raise PreconditionViolated("sigma and tau must differ")
    g = state.graph
    J = dyn.J
    zeros = [0.0] * N_max
    sJ = tuple(sigma.degree[j - 1] for j in J)
    tJ = tuple(tau.degree[j - 1] for j in J)
    if sJ != tJ:
        return zeros
    p, n = sigma.degree[i - 1], tau.degree[i - 1]
    if p < n:
        sigma, tau, p, n = tau, sigma, n, p
    if p == n or sigma.range != tau.range:
        return zeros
    cut = tau.degree
    if g.segment(sigma, dg.zero(g.k), cut) != tau:
        return zeros
    lam = g.segment(sigma, cut, sigma.degree)
    kap = state.kappa(lam.source)
    out = []
    for N in range(1, N_max + 1):
        d = list(tau.degree)
        d[i - 1] = n + N * (p - n)
        out.append(state.weight(d) * kap)
    fl = [to_float(u) for u in out]
    ratio = math.exp(-dyn.r[i - 1] * (p - n))
    for a, b in zip(fl, fl[1:]):
        if not (b < a and math.isclose(b / a, ratio, rel_tol=1e-12)):
            raise AssertionError("bound sequence is not geometric")
    return out


# -- |K| >= 2: bracketing the non-uniqueness integral ----------------------

class Bracket(NamedTuple):
    lower: float
    upper: float
    uppers: Tuple[float, ...]  # upper approximations at depth 0..depth


def notunique_lower_bound(state: CriticalState, lam: Path, mu: Path, depth: int = 3) -> Bracket:
    """Bracket nu^0{x = mu y : lam y = mu y} for J-degree-zero lam, mu.

    The upper bound at depth N keeps every y' of degree N.1_K whose
    extensions still agree up to d(lam) ^ d(mu) + N.1_K.  The lower bound
    keeps the y' whose remaining tails sit in the largest set of tail
    pairs that stays in agreement forever (a greatest fixpoint over finitely
    many states), so those cylinders lie wholly inside the set.
    """
    dyn = state.dynamics
    g = state.graph
    if len(dyn.K) < 2:
        raise PreconditionViolated(f"needs |K| >= 2, got K = {list(dyn.K)}")
    if any(lam.degree[j - 1] or mu.degree[j - 1] for j in dyn.J):
        raise PreconditionViolated("lam and mu must have J-degree zero")
    if lam.source != mu.source:
        raise PreconditionViolated("lam and mu must share a source")
    if lam.range != mu.range:
        return Bracket(0.0, 0.0, (0.0,) * (depth + 1))
    ctx = state.context
    z = dg.zero(g.k)
    step = tuple(1 if c in dyn.K else 0 for c in range(1, g.k + 1))
    base = dg.meet(lam.degree, mu.degree)

    def measure(path: Path) -> float:
        return to_float(ctx.weight(path.degree) * ctx.C_J * ctx.kappa(path.source))

    def transitions(state_pair):
        a, b = state_pair
        for w in g.paths(a.source, step):
            aw, bw = g.compose(a, w), g.compose(b, w)
            ok = g.segment(aw, z, step) == g.segment(bw, z, step)
            yield ok, (g.segment(aw, step, aw.degree), g.segment(bw, step, bw.degree))

    uppers, final = [], []
    for N in range(depth + 1):
        qN = tuple(N * s for s in step)
        cut = dg.add(base, qN)
        kept = []
        for y in g.paths(mu.source, qN):
            P, Q = g.compose(lam, y), g.compose(mu, y)
            if g.segment(P, z, cut) == g.segment(Q, z, cut):
                kept.append((y, (g.segment(P, cut, P.degree), g.segment(Q, cut, Q.degree))))
        uppers.append(math.fsum(measure(g.compose(mu, y)) for y, _ in kept))
        final = kept

    # greatest fixpoint of "every step agrees and lands back in the set"
    seen, frontier, edges = set(), [s for _, s in final], {}
    while frontier:
        s = frontier.pop()
        if s in seen:
            continue
        seen.add(s)
        edges[s] = list(transitions(s))
        frontier.extend(nxt for _, nxt in edges[s])
    good = set(seen)
    changed = True
    while changed:
        changed = False
        for s in list(good):
            if any(not ok or nxt not in good for ok, nxt in edges[s]):
                good.discard(s)
                changed = True
    lower = math.fsum(measure(g.compose(mu, y)) for y, s in final if s in good)
    if lower > uppers[-1] + 1e-12 or any(b > a + 1e-12 for a, b in zip(uppers, uppers[1:])):
        raise AssertionError("bracket is not monotone")
    return Bracket(lower, uppers[-1], tuple(uppers))


# -- uniqueness condition ---------------------------------------------------

class Independence(NamedTuple):
    independent: bool
    relation: Optional[Tuple[int, ...]]


def _high_precision(x):
    if isinstance(x, ExactRate):
        a = x.offset
        b = x.log_arg
        return mpmath.mpf(a.numerator) / a.denominator + mpmath.log(mpmath.mpf(b.numerator) / b.denominator)
    return mpmath.mpf(float(x))


def rational_independence(r: Sequence, maxcoeff: int = 10 ** 6) -> Independence:
    """Integer-relation search on the rates; no relation up to maxcoeff counts as independent.

    Exact rates are evaluated at 50 digits.  Float rates only carry double
    precision, so the relation tolerance is loosened to 1e-12 for them.
    """
    if len(r) < 2:
        return Independence(True, None)
    exact = all(isinstance(x, ExactRate) for x in r)
    with mpmath.workdps(50):
        vals = [_high_precision(x) for x in r]
        tol = mpmath.mpf(10) ** (-40 if exact else -12)
        rel = mpmath.pslq(vals, tol=tol, maxcoeff=maxcoeff, maxsteps=10 ** 5)
    if rel is None:
        return Independence(True, None)
    return Independence(False, tuple(int(c) for c in rel))
