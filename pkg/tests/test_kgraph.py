
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgkms import degrees as dg
from kgkms.builders import cube, from_matrices, single_vertex, twisted_cube
from kgkms.errors import CapExceeded, InvalidKGraph, NotComposable, OutOfRange
from kgkms.kgraph import (CubeInconsistent, Edge, EndpointMismatch, NoSources, NotBijective, Skeleton,
                          Square, validate)
from kgkms.spectral import vertex_matrices

from oracles import canonical, lambda_min_brute, path_count, swap_class


def _violations(sk, sq):
    with pytest.raises(InvalidKGraph) as info:
        validate(sk, sq)
    return info.value.violations


# -- validate ---------------------------------------------------------------

def test_one_loop_each_is_valid():
    g = validate(*single_vertex(1, 1))
    assert len(g.paths(None, (3, 3))) == 1


@given(st.permutations(range(6)))
@settings(max_examples=40, deadline=None)
def test_any_bijection_on_2x3_pairs_validates(perm):
    sk, _ = single_vertex(2, 3)
    dom = [(f"a{i}", f"f{j}") for i in range(2) for j in range(3)]
    cod = [(f"f{j}", f"a{i}") for i in range(2) for j in range(3)]
    squares = [Square(1, 2, dom[t], cod[perm[t]]) for t in range(6)]
    g = validate(sk, squares)
    # every blue-red word has exactly one sorted form
    for e in ("a0", "a1"):
        for f in ("f0", "f1", "f2"):
            assert g.path([f, e]).word == canonical(g, (f, e))


def test_no_sources_reported():
    sk = Skeleton(2, ("v", "w"), (Edge("a0", 1, "v", "v"), Edge("a1", 1, "w", "w"),
                                  Edge("f0", 2, "v", "v")))
    found = _violations(sk, [])
    assert NoSources("w", 2) in found


def test_missing_square_not_bijective():
    sk, sq = single_vertex(2, 3)
    found = _violations(sk, sq[:-1])
    assert any(isinstance(v, NotBijective) for v in found)


def test_endpoint_mismatch():
    sk = Skeleton(2, ("v", "w"), (
        Edge("a0", 1, "v", "w"), Edge("a1", 1, "w", "v"),
        Edge("f0", 2, "v", "w"), Edge("f1", 2, "w", "v")))
    bad = [Square(1, 2, ("a0", "f1"), ("f0", "a0")),  # a0.f1: v->v but f0.a0 is not composable
           Square(1, 2, ("a1", "f0"), ("f1", "a1"))]
    found = _violations(sk, bad)
    assert any(isinstance(v, EndpointMismatch) for v in found)


def test_twisted_cube_inconsistent():
    found = _violations(*twisted_cube())
    assert found and all(isinstance(v, CubeInconsistent) for v in found)
    g_words = found[0].results
    assert len(g_words) == 2


def test_all_violations_reported_together():
    sk, sq = single_vertex(2, 3)
    found = _violations(sk, sq[1:-1])
    assert len(found) >= 1 and all(isinstance(v, NotBijective) for v in found)


# -- compose / segment ------------------------------------------------------

def test_compose_vertex_identity(g23):
    v = g23.vertex("v")
    f = g23.edge("f1")
    assert g23.compose(v, f) == f and g23.compose(f, v) == f


def test_compose_sorted_already(g23):
    p = g23.compose(g23.edge("a0"), g23.edge("f0"))
    assert p.degree == (1, 1) and p.word == ("a0", "f0")


def test_compose_red_then_blue_uses_one_square(g23):
    p = g23.compose(g23.edge("f0"), g23.edge("a1"))
    sq = {s.fe: s.ef for s in g23.squares}
    assert p.word == sq[("f0", "a1")]


def test_compose_not_composable():
    g = validate(*from_matrices([[[0, 1], [1, 0]], [[0, 1], [1, 0]]]))
    e = next(p for p in g.paths("v0", (1, 0)))
    with pytest.raises(NotComposable):
        g.compose(e, e)


def test_segment_examples(g23):
    lam = g23.path(["a0", "f0", "a1", "f2"])
    assert g23.segment(lam, (0, 0), lam.degree) == lam
    assert g23.segment(lam, (1, 1), (1, 1)) == g23.vertex("v")
    rect = g23.path(["a0", "f0"])
    blue = g23.segment(rect, (0, 1), (1, 1))
    red = g23.segment(rect, (0, 0), (0, 1))
    # the other factorization of the rectangle, read off the inverse square
    sq = {s.ef: s.fe for s in g23.squares}
    assert (red.word[0], blue.word[0]) == sq[("a0", "f0")]
    with pytest.raises(OutOfRange):
        g23.segment(rect, (0, 0), (2, 0))


def test_factorization_property_all_corpus(corpus_graphs):
    for g in corpus_graphs.values():
        cap = tuple(2 if g.k == 2 else 1 for _ in range(g.k))
        z = dg.zero(g.k)
        for lam in g.paths_upto(None, cap):
            n = lam.degree
            for q in dg.box(n):
                for p in dg.box(q):
                    a = g.segment(lam, z, p)
                    b = g.segment(lam, p, q)
                    c = g.segment(lam, q, n)
                    assert g.compose(a, g.compose(b, c)) == lam


def test_associativity_and_degree(corpus_graphs):
    for g in corpus_graphs.values():
        P = g.paths_upto(None, (1,) * g.k)
        for x in P:
            for y in (p for p in P if p.range == x.source):
                xy = g.compose(x, y)
                assert xy.degree == dg.add(x.degree, y.degree)
                assert (xy.range, xy.source) == (x.range, y.source)
                for z in (p for p in P if p.range == y.source):
                    assert g.compose(xy, z) == g.compose(x, g.compose(y, z))


def test_canonical_form_matches_brute_force(corpus_graphs):
    for g in corpus_graphs.values():
        for lam in g.paths_upto(None, (1,) * g.k):
            if lam.word:
                assert lam.word == canonical(g, lam.word)
                # every word in the swap class names the same path
                for w in sorted(swap_class(g, lam.word))[:6]:
                    assert g.path(w) == lam


# -- enumeration ------------------------------------------------------------

def test_paths_examples(g23):
    assert len(g23.paths(None, (1, 1))) == 6
    assert g23.paths(None, (0, 0)) == (g23.vertex("v"),)
    assert len(g23.paths("v", (0, 1))) == 3
    words = [p.word for p in g23.paths(None, (2, 1))]
    assert words == sorted(words)


def test_count_identity(corpus_graphs):
    for g in corpus_graphs.values():
        vm = vertex_matrices(g)
        for n in dg.box((2,) * g.k):
            if dg.total(n) > 4:
                continue
            expected = int(np.asarray(vm.power(n), dtype=np.int64).sum())
            assert len(g.paths(None, n)) == expected


def test_count_against_raw_words():
    g = validate(*single_vertex(2, 3))
    for n in [(1, 1), (2, 1), (1, 2)]:
        assert len(g.paths(None, n)) == path_count(g, n)


def test_cap_exceeded(g23):
    with pytest.raises(CapExceeded):
        g23.check_cap((5, 0))


# -- common extensions ------------------------------------------------------

def test_lambda_min_examples(g23):
    a, f, b = g23.edge("a0"), g23.edge("f0"), g23.edge("a1")
    v = g23.vertex("v")
    assert g23.lambda_min(a, a) == ((v, v),)
    assert g23.lambda_min(a, b) == ()
    pairs = g23.lambda_min(a, f)
    assert len(pairs) == 1
    eta, zeta = pairs[0]
    assert eta.degree == (0, 1) and zeta.degree == (1, 0)
    assert g23.compose(a, eta) == g23.compose(f, zeta)
    assert set(pairs) == lambda_min_brute(g23, a, f)


def test_mce_examples(g23):
    a, f, b = g23.edge("a0"), g23.edge("f0"), g23.edge("a1")
    assert g23.mce(a, a) == (a,)
    assert g23.mce(a, b) == ()
    (one,) = g23.mce(a, f)
    assert one.degree == (1, 1)


def test_lambda_min_symmetry_and_mce_symmetry(corpus_graphs):
    for g in corpus_graphs.values():
        P = g.paths_upto(None, (1,) * g.k)
        for mu in P:
            for nu in P:
                fwd = set(g.lambda_min(mu, nu))
                back = {(z, e) for e, z in g.lambda_min(nu, mu)}
                assert fwd == back
                assert set(g.mce(mu, nu)) == set(g.mce(nu, mu))


@given(st.permutations(range(6)), st.data())
@settings(max_examples=25, deadline=None)
def test_lambda_min_against_brute_force_random_bijections(perm, data):
    sk, _ = single_vertex(2, 3)
    dom = [(f"a{i}", f"f{j}") for i in range(2) for j in range(3)]
    cod = [(f"f{j}", f"a{i}") for i in range(2) for j in range(3)]
    g = validate(sk, [Square(1, 2, dom[t], cod[perm[t]]) for t in range(6)])
    P = g.paths_upto(None, (1, 1))
    mu = data.draw(st.sampled_from(P))
    nu = data.draw(st.sampled_from(P))
    assert set(g.lambda_min(mu, nu)) == lambda_min_brute(g, mu, nu)


def test_concurrent_enumeration_is_consistent():
    from concurrent.futures import ThreadPoolExecutor
    g = validate(*cube([2, 2, 2]))
    degrees = [n for n in dg.box((2, 2, 2))] * 3
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(lambda n: g.paths(None, n), degrees))
    ref = validate(*cube([2, 2, 2]))
    for n, got in zip(degrees, results):
        assert got == ref.paths(None, n)
