import pytest

from kgkms import degrees as dg
from kgkms.errors import CapExceeded, OutOfRange
from kgkms.measures import nu_cylinder
from kgkms.pathspace import CylinderSpec, Membership, PathSpace


@pytest.fixture(scope="module")
def sp(g23):
    return PathSpace(g23, (1,), (2,))


def test_level_paths(sp, g23):
    assert len(sp.level_paths((0,), (1,))) == 3
    assert len(sp.level_paths((1,), (1,))) == 6
    assert sp.level_paths((0,), (0,)) == (g23.vertex("v"),)
    with pytest.raises(CapExceeded):
        sp.level_paths((0,), (9,))


def test_restrict_examples(sp, g23):
    lam = g23.path(["a0", "f0", "f1"])
    assert sp.restrict(lam, (2,)) == lam
    assert sp.restrict(lam, (0,)) == g23.segment(lam, (0, 0), (1, 0))
    with pytest.raises(OutOfRange):
        sp.restrict(lam, (3,))


def test_inverse_system_laws(corpus_states):
    for state in corpus_states.values():
        g, dyn = state.graph, state.dynamics
        sp = PathSpace(g, dyn.J, dyn.K)
        nK = len(dyn.K)
        for m in dg.box((1,) * len(dyn.J)):
            for q in dg.box((2,) * nK):
                if not dg.leq(sp.degree(m, q), g.degree_cap):
                    continue
                level = sp.level_paths(m, q)
                for p in dg.box(q):
                    for n in dg.box(p):
                        for lam in level:
                            assert sp.restrict(sp.restrict(lam, p), n) == sp.restrict(lam, n)
                    # surjectivity: every coarse path is hit
                    hit = {sp.restrict(lam, p) for lam in level}
                    assert hit == set(sp.level_paths(m, p))


def test_fiber(sp, g23):
    f = g23.edge("f0")
    assert sp.fiber(f, (1,)) == [f]
    two = sp.fiber(f, (2,))
    assert len(two) == 3 and all(x.degree == (0, 2) for x in two)
    total = sum(len(sp.fiber(lam, (2,))) for lam in sp.level_paths((1,), (1,)))
    assert total == len(sp.level_paths((1,), (2,)))
    with pytest.raises(OutOfRange):
        sp.fiber(g23.path(["f0", "f1"]), (1,))


def test_cylinder_member(sp, g23):
    lam = g23.edge("a0")
    assert sp.cylinder_member(lam, CylinderSpec(lam)) is Membership.IN
    assert sp.cylinder_member(g23.edge("a1"), CylinderSpec(lam)) is Membership.OUT
    alpha = g23.edge("f0")
    assert sp.cylinder_member(lam, CylinderSpec(lam, (alpha,))) is Membership.UNDETERMINED
    x = g23.path(["a0", "f1"])
    assert sp.cylinder_member(x, CylinderSpec(lam, (alpha,))) in (Membership.IN, Membership.OUT)
    longer = g23.compose(lam, alpha)
    assert sp.cylinder_member(longer, CylinderSpec(lam, (alpha,))) is Membership.OUT


def test_cylinder_meet_examples(sp, g23):
    a, b, f = g23.edge("a0"), g23.edge("a1"), g23.edge("f0")
    assert sp.cylinder_meet(a, a) == (a,)
    assert sp.cylinder_meet(a, b) == ()
    (pi,) = sp.cylinder_meet(a, f)
    assert pi.degree == (1, 1)
    assert sp.cylinder_meet(a, f, window=(0,)) == ()


def test_meet_partition_matches_measure(crit23, g23):
    ctx = crit23.context
    sp = ctx.space
    # Z(a) & Z(f) has measure nu^1 of the one rectangle
    a, f = g23.edge("a0"), g23.edge("f0")
    (pi,) = sp.cylinder_meet(a, f)
    # fiberwise: measure of rectangles in Lambda^{1,1} agreeing with a and f
    brute = sum(nu_cylinder(ctx, (1,), x) for x in sp.level_paths((1,), (1,))
                if g23.segment(x, (0, 0), (1, 0)) == a and g23.segment(x, (0, 0), (0, 1)) == f)
    assert nu_cylinder(ctx, (1,), pi) == pytest.approx(brute, abs=1e-15)


def test_refine_cylinder_formula(sp, g23):
    tau = g23.vertex("v")
    alphas = (g23.path(["f0", "f1"]), g23.edge("a0"), g23.path(["a1", "f2"]))
    spec = CylinderSpec(tau, alphas)
    n, sigmas = sp.refine_cylinder(spec, (1,))
    # join of K-degrees of tau.alpha over alpha meeting the window m = 1
    assert n == (2,)
    for s in sigmas:
        assert sp.cylinder_member(s, spec) is Membership.IN
    # everything of degree (1, 2) not excluded is listed
    for x in sp.level_paths((1,), (2,)):
        assert (x in sigmas) == (sp.cylinder_member(x, spec) is Membership.IN)
    n0, sig0 = sp.refine_cylinder(spec, (0,))
    assert n0 == (2,) and all(s.degree == (0, 2) for s in sig0)
    assert len(sig0) == 9 - 1
