"""Vertex matrices, Perron-Frobenius data, dynamics and the existence gate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import degrees as dg
from .errors import (CommutationFailure, DegenerateCriticalBeta, HypothesisUnchecked,
                     InconsistentPartition, KGraphError, NoConvergence, NotCoordinatewiseIrreducible,
                     NotExact, NotIrreducible)
from .exact import ExactRate, weight as exact_weight
from .kgraph import KGraph

TOL = 1e-9


@dataclass(frozen=True)
class VertexMatrices:
    vertices: Tuple[str, ...]
    A: Tuple[np.ndarray, ...]

    @property
    def k(self) -> int:
        return len(self.A)

    def power(self, n: Sequence[int]) -> np.ndarray:
        out = np.eye(len(self.vertices), dtype=object)
        for Ai, ni in zip(self.A, n):
            out = out.dot(np.linalg.matrix_power(Ai.astype(object), int(ni)))
        return out


def vertex_matrices(g: KGraph) -> VertexMatrices:
    idx = {v: t for t, v in enumerate(g.vertices)}
    nv = len(g.vertices)
    mats = []
    for c in range(1, g.k + 1):
        A = np.zeros((nv, nv), dtype=np.int64)
        for p in g.paths(None, dg.unit(g.k, c)):
            A[idx[p.range], idx[p.source]] += 1
        direct = np.zeros_like(A)
        for e in g.edges.values():
            if e.color == c:
                direct[idx[e.range], idx[e.source]] += 1
        if not np.array_equal(A, direct):
            raise KGraphError(f"color {c}: enumeration disagrees with the skeleton")
        mats.append(A)
    for i in range(g.k):
        for j in range(i + 1, g.k):
            if not np.array_equal(mats[i] @ mats[j], mats[j] @ mats[i]):
                raise CommutationFailure(f"A_{i + 1} A_{j + 1} != A_{j + 1} A_{i + 1}")
    return VertexMatrices(g.vertices, tuple(mats))


def is_irreducible(A) -> bool:
    A = np.asarray(A)
    n = A.shape[0]
    if n == 1:
        return bool(A[0, 0] > 0)
    ncomp, _ = connected_components(csr_matrix(A != 0), directed=True, connection="strong")
    return ncomp == 1


def perron(A, tol: float = 1e-12, max_iter: int = 100_000) -> Tuple[float, np.ndarray]:
    """Spectral radius and unit-1-norm positive eigenvector by power iteration on A + I."""
    A = np.asarray(A, dtype=float)
    if not is_irreducible(A):
        raise NotIrreducible("perron() needs an irreducible matrix")
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0]), np.ones(1)
    B = A + np.eye(n)
    x = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        y = B @ x
        y /= y.sum()
        if np.max(np.abs(y - x)) <= tol * np.max(np.abs(y)):
            x = y
            break
        x = y
    else:
        raise NoConvergence(max_iter)
    rho = float((A @ x).sum() / x.sum())
    resid = float(np.max(np.abs(A @ x - rho * x)))
    if resid > 1e-9 * max(1.0, rho) or (x <= 0).any():
        raise NoConvergence(it, resid)
    return rho, x


@dataclass(frozen=True)
class SpectralData:
    matrices: VertexMatrices
    rho: Tuple[float, ...]
    kappa: np.ndarray
    irreducible: Tuple[bool, ...]
    coordinatewise_irreducible: bool
    rho_exact: Optional[Tuple[int, ...]] = None
    kappa_exact: Optional[Tuple[Fraction, ...]] = None

    @property
    def exact(self) -> bool:
        return self.kappa_exact is not None

    def index(self, v: str) -> int:
        return self.matrices.vertices.index(v)


def _exact_kappa(mats: Sequence[np.ndarray], rho: Sequence[int]) -> Optional[Tuple[Fraction, ...]]:
    M = sympy.Matrix(mats[0].tolist()) - rho[0] * sympy.eye(mats[0].shape[0])
    basis = M.nullspace()
    if len(basis) != 1:
        return None
    vec = basis[0]
    total = sum(vec)
    kappa = [sympy.Rational(x) / total for x in vec]
    for A, r in zip(mats, rho):
        if sympy.Matrix(A.tolist()) * sympy.Matrix(kappa) != r * sympy.Matrix(kappa):
            return None
    if any(x <= 0 for x in kappa):
        return None
    return tuple(Fraction(int(x.p), int(x.q)) for x in kappa)


def common_pf(g: KGraph, vm: Optional[VertexMatrices] = None) -> SpectralData:
    vm = vm or vertex_matrices(g)
    irr = tuple(is_irreducible(A) for A in vm.A)
    bad = [c for c, ok in enumerate(irr, start=1) if not ok]
    if bad:
        raise NotCoordinatewiseIrreducible(bad)
    pairs = [perron(A) for A in vm.A]
    rho = tuple(p[0] for p in pairs)
    kappa = pairs[0][1]
    for c, (_, other) in enumerate(pairs[1:], start=2):
        if np.max(np.abs(other - kappa)) > TOL:
            raise KGraphError(f"Perron vector of color {c} differs from color 1")
    for A, r in zip(vm.A, rho):
        if np.max(np.abs(A @ kappa - r * kappa)) > TOL * max(1.0, r):
            raise KGraphError("common Perron vector fails an eigen-equation")
    rho_exact = kappa_exact = None
    rounded = tuple(int(round(r)) for r in rho)
    if all(abs(r - q) <= 1e-9 for r, q in zip(rho, rounded)):
        kappa_exact = _exact_kappa(vm.A, rounded)
        if kappa_exact is not None:
            rho_exact = rounded
    return SpectralData(vm, rho, kappa, irr, True, rho_exact, kappa_exact)


def critical_beta(s: SpectralData, r: Sequence[float]) -> float:
    r = [float(x) for x in r]
    if any(x <= 0 for x in r):
        raise ValueError("dynamics must be positive")
    return max(math.log(p) / x for p, x in zip(s.rho, r))


@dataclass(frozen=True)
class Dynamics:
    """Normalized dynamics: critical inverse temperature 1, partition (J, K)."""

    r: Tuple[float, ...]
    K: Tuple[int, ...]
    J: Tuple[int, ...]
    beta_c: float = 1.0
    exact_r: Optional[Tuple[ExactRate, ...]] = None

    @property
    def k(self) -> int:
        return len(self.r)

    def weight(self, n: Sequence[int], beta: float = 1.0):
        """e^{-beta r.n}; exact ExpPoly when exact rates are known and beta = 1."""
        if self.exact_r is not None and beta == 1:
            return exact_weight(self.exact_r, n)
        return math.exp(-beta * sum(x * ni for x, ni in zip(self.r, n)))


def _detect_K(s: SpectralData, r: Sequence[float], tol_K: float) -> Tuple[int, ...]:
    return tuple(c for c, (x, p) in enumerate(zip(r, s.rho), start=1)
                 if abs(x - math.log(p)) <= tol_K * max(1.0, abs(math.log(p))))


def _exact_beta_c(s: SpectralData, rates: Sequence[ExactRate], argmax: int) -> Fraction:
    rate = rates[argmax - 1]
    rho = s.rho_exact[argmax - 1]
    if rate.offset != 0 or rate.log_arg <= 1:
        raise NotExact("critical temperature is not a rational number")
    # ln(rho)/ln(b) rational  <=>  rho^q = b^p
    guess = Fraction(math.log(rho) / math.log(rate.log_arg)).limit_denominator(64)
    p, q = guess.numerator, guess.denominator
    if Fraction(rho) ** q != rate.log_arg ** p:
        raise NotExact("critical temperature is not a rational number")
    return guess


def normalize_dynamics(s: SpectralData, r: Sequence, K: Optional[Sequence[int]] = None,
                       tol_K: float = TOL, exact: bool = False) -> Dynamics:
    """Rescale r so the critical inverse temperature is 1 and find (J, K).

    ``r`` may hold floats or :class:`ExactRate` values.  With ``exact=True``
    the rescaling is done in exact arithmetic when possible; otherwise
    :class:`NotExact` is raised and callers fall back to floats.
    """
    rf = tuple(float(x) for x in r)
    beta_c = critical_beta(s, rf)
    if beta_c <= 0:
        raise DegenerateCriticalBeta("every spectral radius is 1, so beta_c = 0")
    rn = tuple(beta_c * x for x in rf)
    found = _detect_K(s, rn, tol_K)
    if K is not None:
        K = tuple(sorted(set(int(c) for c in K)))
        if not K or any(c < 1 or c > len(rf) for c in K) or set(K) != set(found):
            raise InconsistentPartition(f"declared K={list(K)} but the dynamics give K={list(found)}")
    K = found
    J = tuple(c for c in range(1, len(rf) + 1) if c not in K)
    exact_r = None
    if exact:
        if s.rho_exact is None or not all(isinstance(x, ExactRate) for x in r):
            raise NotExact("rational mode needs integer spectral radii and exact rates")
        t = 1 / _exact_beta_c(s, r, K[0])
        scaled = tuple(x.scale(1 / t) for x in r)
        exact_K = tuple(c for c in range(1, len(r) + 1) if scaled[c - 1].is_log_of(s.rho_exact[c - 1]))
        if exact_K != K:
            raise NotExact("float and exact partitions disagree")
        exact_r = scaled
    return Dynamics(rn, K, J, beta_c, exact_r)


def has_cycle(A) -> bool:
    A = np.asarray(A, dtype=object)
    P = np.eye(A.shape[0], dtype=object)
    for _ in range(A.shape[0]):
        P = P.dot(A)
        if np.trace(P) != 0:
            return True
    return False


@dataclass(frozen=True)
class Gate:
    kind: str  # "NoKMS", "Supercritical" or "Critical"
    K: Tuple[int, ...] = ()

    def __str__(self):
        return f"Critical({set(self.K)})" if self.kind == "Critical" else self.kind


def existence_gate(s: SpectralData, r: Sequence[float], beta: float, tol: float = TOL) -> Gate:
    bad = [c for c, A in enumerate(s.matrices.A, start=1) if not has_cycle(A)]
    if bad:
        raise HypothesisUnchecked(f"coordinate graphs of colors {bad} have no cycle")
    below, equal = [], []
    for c, (x, p) in enumerate(zip(r, s.rho), start=1):
        lhs, rhs = beta * float(x), math.log(p)
        if abs(lhs - rhs) <= tol * max(1.0, abs(rhs)):
            equal.append(c)
        elif lhs < rhs:
            below.append(c)
    if below:
        return Gate("NoKMS")
    if equal:
        return Gate("Critical", tuple(equal))
    return Gate("Supercritical")


@dataclass(frozen=True)
class Subinvariance:
    subinvariant: bool
    equality: bool = False

    @property
    def strict(self) -> bool:
        return self.subinvariant and not self.equality


def subinvariance_check(A, eps, t: float, tol: float = TOL) -> Subinvariance:
    A = np.asarray(A, dtype=float)
    eps = np.asarray(eps, dtype=float)
    Ae = A @ eps
    scale = max(1.0, float(np.max(np.abs(t * eps))))
    if (Ae > t * eps + tol * scale).any():
        return Subinvariance(False)
    equality = bool(np.max(np.abs(Ae - t * eps)) <= tol * scale)
    if is_irreducible(A) and t > 0:
        rho, _ = perron(A)
        if t < rho - tol * max(1.0, rho) or (eps <= 0).any():
            raise AssertionError("subinvariant vector contradicts Perron-Frobenius theory")
    return Subinvariance(True, equality)
