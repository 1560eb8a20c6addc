import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgkms.builders import from_matrices, product_of_cycles, single_vertex
from kgkms.errors import (DegenerateCriticalBeta, HypothesisUnchecked, InconsistentPartition, NotCoordinatewiseIrreducible,
                          NotExact, NotIrreducible)
from kgkms.exact import parse_rate
from kgkms.kgraph import validate
from kgkms.spectral import (common_pf, critical_beta, existence_gate, is_irreducible, normalize_dynamics,
                            perron, subinvariance_check, vertex_matrices)

from oracles import perron_numpy


def test_vertex_matrices_examples(g23):
    vm = vertex_matrices(g23)
    assert vm.A[0].tolist() == [[2]] and vm.A[1].tolist() == [[3]]
    one = vertex_matrices(validate(*single_vertex(1, 1)))
    assert one.A[0].tolist() == [[1]] and one.A[1].tolist() == [[1]]
    both = [[1, 1], [1, 1]]
    g = validate(*from_matrices([both, both]))
    assert vertex_matrices(g).A[0].tolist() == both


def test_commutation_on_corpus(corpus_graphs):
    for g in corpus_graphs.values():
        A = vertex_matrices(g).A
        for x in A:
            for y in A:
                assert np.array_equal(x @ y, y @ x)


@pytest.mark.parametrize("A, expected", [
    ([[3]], True), ([[0]], False), ([[0, 1], [0, 0]], False), ([[0, 1], [1, 0]], True),
    ([[1, 1, 0], [0, 1, 1], [1, 0, 1]], True), ([[1, 0], [0, 1]], False),
])
def test_is_irreducible(A, expected):
    assert is_irreducible(A) is expected


@pytest.mark.parametrize("A, rho, kappa", [
    ([[3]], 3.0, [1.0]),
    ([[0, 1], [1, 0]], 1.0, [0.5, 0.5]),
    ([[1, 1], [1, 1]], 2.0, [0.5, 0.5]),
])
def test_perron_examples(A, rho, kappa):
    r, k = perron(A)
    assert r == pytest.approx(rho, abs=1e-12)
    assert np.allclose(k, kappa, atol=1e-12)


def test_perron_rejects_reducible():
    with pytest.raises(NotIrreducible):
        perron([[1, 1], [0, 1]])


@st.composite
def irreducible_matrices(draw):
    n = draw(st.integers(2, 5))
    A = np.array(draw(st.lists(st.lists(st.integers(0, 3), min_size=n, max_size=n),
                               min_size=n, max_size=n)))
    for t in range(n):  # add a cycle through every vertex
        A[t, (t + 1) % n] = max(A[t, (t + 1) % n], 1)
    return A


@given(irreducible_matrices())
@settings(max_examples=60, deadline=None)
def test_perron_against_numpy(A):
    rho, kappa = perron(A)
    r2, k2 = perron_numpy(A)
    assert rho == pytest.approx(r2, rel=1e-9)
    assert np.allclose(kappa, k2, atol=1e-8)
    assert np.max(np.abs(A @ kappa - rho * kappa)) <= 1e-9 * max(1, rho)
    assert (kappa > 0).all() and kappa.sum() == pytest.approx(1.0)


def test_common_pf_examples(g23, corpus_graphs):
    s = common_pf(g23)
    assert s.rho == (2.0, 3.0) and s.kappa.tolist() == [1.0]
    assert s.rho_exact == (2, 3) and s.kappa_exact == (Fraction(1),)
    s2 = common_pf(corpus_graphs["two-vertex"])
    assert s2.kappa_exact == (Fraction(1, 3), Fraction(2, 3))
    for A in s2.matrices.A:
        _, k = perron_numpy(A)
        assert np.allclose(k, s2.kappa, atol=1e-10)


def test_common_pf_rejects_reducible_color():
    g = validate(*from_matrices([[[1, 1], [0, 1]], [[1, 1], [0, 1]]]))
    with pytest.raises(NotCoordinatewiseIrreducible) as info:
        common_pf(g)
    assert info.value.colors == (1, 2)


def test_critical_beta_examples(s23):
    assert critical_beta(s23, [math.log(2), math.log(3)]) == pytest.approx(1.0)
    assert critical_beta(s23, [1.0, math.log(3)]) == pytest.approx(1.0)
    cyc = common_pf(validate(*product_of_cycles(3)))
    assert critical_beta(cyc, [1.0, 2.0]) == 0.0


def test_normalize_examples(s23):
    d = normalize_dynamics(s23, [2.0, 2 * math.log(3)])
    assert d.r == pytest.approx((1.0, math.log(3))) and d.K == (2,) and d.J == (1,)
    d = normalize_dynamics(s23, [math.log(2), math.log(3)])
    assert d.r == pytest.approx((math.log(2), math.log(3))) and d.K == (1, 2) and d.J == ()
    with pytest.raises(InconsistentPartition):
        normalize_dynamics(s23, [1.0, math.log(3)], K=[1])
    assert normalize_dynamics(s23, [1.0, math.log(3)], K=[2]).K == (2,)


def test_normalize_degenerate():
    cyc = common_pf(validate(*product_of_cycles(3)))
    with pytest.raises(DegenerateCriticalBeta):
        normalize_dynamics(cyc, [1.0, 1.0])


def test_normalize_exact(s23):
    d = normalize_dynamics(s23, [parse_rate("2"), parse_rate("2*ln3")], exact=True)
    assert [str(x) for x in d.exact_r] == ["1", "ln(3)"]
    with pytest.raises(NotExact):
        normalize_dynamics(s23, [parse_rate("2"), parse_rate("ln2")], exact=True)


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0))
@settings(max_examples=60, deadline=None)
def test_normalize_idempotent(r1, r2):
    s = common_pf(validate(*single_vertex(2, 3)))
    once = normalize_dynamics(s, [r1, r2])
    twice = normalize_dynamics(s, once.r)
    assert twice.r == pytest.approx(once.r, abs=1e-12)
    assert critical_beta(s, once.r) == pytest.approx(1.0, abs=1e-12)
    assert once.K


def test_gate_examples(s23):
    r = [1.0, math.log(3)]
    assert existence_gate(s23, r, 0.9).kind == "NoKMS"
    assert existence_gate(s23, r, 2.0).kind == "Supercritical"
    gate = existence_gate(s23, r, 1.0)
    assert gate.kind == "Critical" and gate.K == (2,) and str(gate) == "Critical({2})"


@given(st.floats(0.01, 3.0))
@settings(max_examples=60, deadline=None)
def test_gate_monotone(beta):
    s = common_pf(validate(*single_vertex(2, 3)))
    kind = existence_gate(s, [1.0, math.log(3)], beta).kind
    if beta < 1 - 1e-8:
        assert kind == "NoKMS"
    if beta >= 1:
        assert kind != "NoKMS"


def test_gate_needs_cycles():
    from kgkms.spectral import SpectralData, VertexMatrices
    A = np.array([[0, 1], [0, 0]])
    vm = VertexMatrices(("v", "w"), (A,))
    s = SpectralData(vm, (1.0,), np.array([0.5, 0.5]), (False,), False)
    with pytest.raises(HypothesisUnchecked):
        existence_gate(s, [1.0], 1.0)


def test_subinvariance_examples():
    eq = subinvariance_check([[2]], [1], 2)
    assert eq.subinvariant and eq.equality and not eq.strict
    strict = subinvariance_check([[2]], [1], 3)
    assert strict.subinvariant and strict.strict
    assert not subinvariance_check([[1, 1], [1, 1]], [1, 1], 1).subinvariant


@given(irreducible_matrices(), st.floats(0.0, 3.0))
@settings(max_examples=40, deadline=None)
def test_subinvariance_implies_perron_bound(A, extra):
    rho, kappa = perron(A)
    t = rho + extra
    res = subinvariance_check(A, kappa, t)
    assert res.subinvariant
    assert t >= rho - 1e-9
