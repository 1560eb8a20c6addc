"""Formal linear combinations of spanning elements t_mu t_nu^*.

The product of two spanning elements is
(t_mu t_nu^*)(t_sigma t_tau^*) = sum over (eta, zeta) in Lambda^min(nu, sigma)
of t_{mu eta} t_{tau zeta}^*, which is all the multiplication needs.
Coefficients may be ints, Fractions, floats, complex numbers or ExpPoly.
"""

from __future__ import annotations

import cmath
from typing import Dict, Sequence, Tuple

from .exact import ExactRate, weight as exact_weight
from .kgraph import KGraph, Path

Term = Tuple[Path, Path]


class ToeplitzElement:
    __slots__ = ("graph", "terms")

    def __init__(self, graph: KGraph, terms: Dict[Term, object] | None = None):
        self.graph = graph
        clean = {}
        for (mu, nu), c in (terms or {}).items():
            if mu.source != nu.source:
                raise ValueError(f"t_{mu} t_{nu}^* needs s(mu) = s(nu)")
            if not c == 0:
                clean[(mu, nu)] = c
        self.terms = clean

    # -- construction --------------------------------------------------------

    @classmethod
    def span(cls, graph: KGraph, mu: Path, nu: Path, coeff=1) -> "ToeplitzElement":
        return cls(graph, {(mu, nu): coeff})

    # -- linear structure ----------------------------------------------------

    def _merge(self, other: "ToeplitzElement", sign: int) -> "ToeplitzElement":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0) + sign * c
        return ToeplitzElement(self.graph, out)

    def __add__(self, other):
        return self._merge(other, 1)

    def __sub__(self, other):
        return self._merge(other, -1)

    def __neg__(self):
        return ToeplitzElement(self.graph, {k: -c for k, c in self.terms.items()})

    def scale(self, c) -> "ToeplitzElement":
        return ToeplitzElement(self.graph, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, ToeplitzElement):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, ToeplitzElement):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def star(self) -> "ToeplitzElement":
        return adjoint(self)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (mu, nu), c in sorted(self.terms.items(), key=lambda kv: (kv[0][0].word, kv[0][1].word,
                                                                      kv[0][0].range)):
            parts.append(f"{c}*t[{mu}]t[{nu}]^*")
        return " + ".join(parts)


def zero(g: KGraph) -> ToeplitzElement:
    return ToeplitzElement(g)


def t(g: KGraph, lam: Path) -> ToeplitzElement:
    """t_lambda = t_lambda t_{s(lambda)}^*."""
    return ToeplitzElement.span(g, lam, g.vertex(lam.source))


def t_star(g: KGraph, lam: Path) -> ToeplitzElement:
    return ToeplitzElement.span(g, g.vertex(lam.source), lam)


def unit(g: KGraph) -> ToeplitzElement:
    return ToeplitzElement(g, {(g.vertex(v), g.vertex(v)): 1 for v in g.vertices})


def multiply(a: ToeplitzElement, b: ToeplitzElement) -> ToeplitzElement:
    g = a.graph
    out: Dict[Term, object] = {}
    for (mu, nu), c1 in a.terms.items():
        for (sigma, tau), c2 in b.terms.items():
            for eta, zeta in g.lambda_min(nu, sigma):
                key = (g.compose(mu, eta), g.compose(tau, zeta))
                out[key] = out.get(key, 0) + c1 * c2
    return ToeplitzElement(g, out)


def adjoint(a: ToeplitzElement) -> ToeplitzElement:
    return ToeplitzElement(a.graph, {(nu, mu): c.conjugate() for (mu, nu), c in a.terms.items()})


def gauge_expectation(a: ToeplitzElement) -> ToeplitzElement:
    return ToeplitzElement(a.graph, {(mu, nu): c for (mu, nu), c in a.terms.items()
                                     if mu.degree == nu.degree})


def _delta(mu: Path, nu: Path) -> Tuple[int, ...]:
    return tuple(x - y for x, y in zip(mu.degree, nu.degree))


def apply_dynamics(a: ToeplitzElement, z: complex, r: Sequence[float]) -> ToeplitzElement:
    """Scale t_mu t_nu^* by exp(i z r.(d(mu) - d(nu)))."""
    rf = [float(x) for x in r]
    out = {}
    for (mu, nu), c in a.terms.items():
        d = _delta(mu, nu)
        if not any(d):
            out[(mu, nu)] = c
            continue
        out[(mu, nu)] = c * cmath.exp(1j * z * sum(x * di for x, di in zip(rf, d)))
    return ToeplitzElement(a.graph, out)


def imaginary_dynamics(a: ToeplitzElement, beta, r: Sequence) -> ToeplitzElement:
    """alpha_{i beta}(a): t_mu t_nu^* scaled by exp(-beta r.(d(mu) - d(nu))).

    When every rate is an ExactRate and beta is a positive integer the
    factors are exact ExpPoly values; otherwise they are real floats.
    """
    exact = all(isinstance(x, ExactRate) for x in r) and isinstance(beta, int) and beta >= 0
    rf = [float(x) for x in r]
    out = {}
    for (mu, nu), c in a.terms.items():
        d = _delta(mu, nu)
        if not any(d):
            out[(mu, nu)] = c
        elif exact:
            out[(mu, nu)] = c * exact_weight(r, [beta * x for x in d])
        else:
            out[(mu, nu)] = c * cmath.exp(-beta * sum(x * di for x, di in zip(rf, d))).real
    return ToeplitzElement(a.graph, out)


def spanning_terms(g: KGraph, max_degree: Sequence[int]) -> list:
    """All t_mu t_nu^* with d(mu), d(nu) <= max_degree, as (mu, nu) pairs."""
    P = g.paths_upto(None, max_degree)
    return [(mu, nu) for mu in P for nu in P if mu.source == nu.source]
