import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from silab import gamma as gm
from silab.field_linalg import Subspace, random_subspace, random_vector, span, unit, vadd, vscale, vsub
from silab.polyring import PrimePoly, random_homogeneous
from silab.quadform import QuadForm
from oracles import member


P, D = 11, 7


@pytest.fixture
def M():
    return QuadForm.sum_of_squares(P, D)


def test_make_rejects_bad_input(M):
    with pytest.raises(ValueError):
        gm.GammaElement.make(M, 1, unit(0, D), span([unit(1, D)], P, D))
    with pytest.raises(ValueError):
        gm.GammaElement.make(M, 1, unit(0, D), None, PrimePoly.var(0, P, D) * PrimePoly.var(1, P, D))


def test_identity_is_neutral(M, rng):
    for _ in range(10):
        a = gm.GammaElement.make(M, 1, unit(0, D), span([unit(0, D), unit(2, D)], P, D),
                                 random_homogeneous(rng, P, D, 1))
        assert gm.hat_add(a, gm.identity(M, 1)) == a


def test_opposite_pi_sum(M, rng):
    e1 = unit(0, D)
    f, g = random_homogeneous(rng, P, D, 1), random_homogeneous(rng, P, D, 1)
    a = gm.GammaElement.make(M, 1, e1, None, f)
    b = gm.GammaElement.make(M, 1, vscale(P - 1, e1, P), None, g)
    c = gm.hat_add(a, b)
    assert c.h == (0,) * D and c.V == span([e1], P, D)
    assert c == gm.GammaElement.make(M, 1, (0,) * D, span([e1], P, D), f + g)
    assert c.in_gamma_k(2)


@given(st.integers(0, 10 ** 6))
def test_hat_add_structure(seed):
    r = np.random.default_rng(seed)
    M = QuadForm.sum_of_squares(7, 5)
    els = []
    for _ in range(2):
        h = random_vector(r, 7, 5)
        V = span([h], 7, 5) + random_subspace(r, 7, 5, int(r.integers(0, 2)))
        els.append(gm.GammaElement.make(M, 1, h, V, random_homogeneous(r, 7, 5, 1)))
    a, b = els
    c = gm.hat_add(a, b)
    assert c.h == vadd(a.h, b.h, 7) and c.V == a.V + b.V
    assert gm.hat_sub(c, b).h == a.h


def test_related_reflexive_symmetric(M, rng):
    for _ in range(10):
        V = random_subspace(rng, P, D, 2)
        h = V.basis[0]
        a = gm.GammaElement.make(M, 1, h, V, random_homogeneous(rng, P, D, 1))
        b = gm.GammaElement.make(M, 1, h, V, random_homogeneous(rng, P, D, 1))
        assert gm.related(a, a)
        assert gm.related(a, b) == gm.related(b, a)


@given(st.integers(0, 10 ** 6))
def test_related_matches_membership_oracle(seed):
    r = np.random.default_rng(seed)
    p, d = 5, 4
    M = QuadForm.random_nondegenerate(r, p, d)
    V1, V2 = random_subspace(r, p, d, 1), random_subspace(r, p, d, 1)
    a = gm.GammaElement.make(M, 1, (0,) * d, V1, random_homogeneous(r, p, d, 1))
    b = gm.GammaElement.make(M, 1, (0,) * d, V2, random_homogeneous(r, p, d, 1))
    W = V1 + V2
    oracle = member([list(x) for x in M.A], list(W.basis), (a.f - b.f).as_dict(), p)
    assert gm.related(a, b) == oracle


def test_nott_example(M):
    z = (0,) * D
    e = [unit(i, D) for i in range(3)]
    x1 = gm.GammaElement.make(M, 1, z, span([e[0]], P, D), PrimePoly.var(1, P, D))
    x2 = gm.GammaElement.make(M, 1, z, span([e[1]], P, D))
    x3 = gm.GammaElement.make(M, 1, z, span([e[2]], P, D))
    assert gm.related(x1, x2)
    assert gm.related(x2, x3)
    assert not gm.related(x1, x3)


def test_sumset_bounds(M, rng):
    A = gm.GammaSet([gm.lift(M, 1, random_vector(rng, P, D), random_homogeneous(rng, P, D, 1)) for _ in range(4)])
    B = gm.GammaSet([gm.lift(M, 1, random_vector(rng, P, D), random_homogeneous(rng, P, D, 1)) for _ in range(3)])
    assert len(gm.sumset(A, B)) <= len(A) * len(B)
    assert len(gm.sumset(A, gm.GammaSet([gm.identity(M, 1)]))) == len(A)
    assert gm.kfold(A, 2, 2, budget=10 ** 5).fiber((0,) * D)


def test_classify_examples():
    p, d = 11, 7
    M = QuadForm.sum_of_squares(p, d)
    z = (0,) * d
    e1, e2 = unit(0, d), unit(1, d)
    x1 = gm.GammaElement.make(M, 1, z, span([e1], p, d))
    x2 = gm.GammaElement.make(M, 1, z, span([e2], p, d))
    x3 = gm.GammaElement.make(M, 1, z, span([vadd(e1, e2, p)], p, d), PrimePoly.var(0, p, d))
    x4 = gm.GammaElement.make(M, 1, z, span([vsub(e1, e2, p)], p, d))
    v = gm.classify_equivalence([x1, x2, x3])
    assert v.kind == "weak"
    v = gm.classify_equivalence([x1, x2, x4])
    assert v.kind == "strong" and all(gm.related(v.witness, x) for x in (x1, x2, x4))
    assert gm.classify_equivalence([x1]).kind == "strong"
    rep = gm.gwts_check([x1, x2, x3], 2, s=1)
    assert rep["branch"] == "obstruction" and rep["consistent"]
    Y = span(rep["Y_basis"], p, d)
    assert span([e1, e2], p, d).contains_subspace(Y)


def test_gwts_strong_branch_on_constructed_classes(rng):
    p, d, s, k = 7, 11, 1, 2
    M = QuadForm.sum_of_squares(p, d)
    strong = 0
    for _ in range(50):
        g = random_homogeneous(rng, p, d, s)
        Vs = [random_subspace(rng, p, d, 1) for _ in range(s + k + 2)]
        X = gm.random_class_with_witness(M, s, (0,) * d, g, Vs, rng)
        rep = gm.gwts_check(X, k, s=s)
        assert rep["consistent"]
        strong += rep["branch"] == "strong"
    assert strong == 50


def test_gweakdic_branches(rng):
    p, d = 7, 8
    U = Subspace.trivial(p, d)
    spaces = [span([unit(i, d)], p, d) for i in range(4)]
    res = gm.gweakdic(spaces, 3, U)
    assert res.independent == [0, 1, 2]
    plane = span([unit(0, d), unit(1, d)], p, d)
    inside = [span([v], p, d) for v in [(1, 0) + (0,) * 6, (0, 1) + (0,) * 6, (1, 1) + (0,) * 6]]
    res = gm.gweakdic(inside, 3, U)
    assert res.independent is None and plane.contains_subspace(res.W)
    assert all(not V.intersect(res.W).is_trivial() for V in inside)


def test_energy_examples(rng):
    p, d, s = 7, 5, 1
    M = QuadForm.sum_of_squares(p, d)
    H = [random_vector(rng, p, d) for _ in range(5)]
    H.append(vsub(vadd(H[0], H[1], p), H[2], p))
    quads = sum(1 for a, b, c, e in itertools.product(H, repeat=4) if vsub(a, b, p) == vsub(c, e, p))
    zero = {h: PrimePoly.zero(p, d) for h in H}
    assert gm.m_energy(zero, H, M, s).energy == quads
    g = random_homogeneous(rng, p, d, 0)
    lin = {h: M.linear_form(h) * g for h in H}
    assert gm.m_energy(lin, H, M, s).energy == quads
    xi = {h: random_homogeneous(rng, p, d, s) for h in H}
    assert gm.m_energy(xi, H, M, s).energy == gm.m_energy_naive(xi, H, M, s)


def test_json_roundtrip(M, rng):
    a = gm.GammaElement.make(M, 2, unit(0, D), span([unit(0, D), unit(3, D)], P, D),
                             random_homogeneous(rng, P, D, 2))
    assert gm.GammaElement.from_json(a.to_json(), M, 2) == a


def test_mismatched_pairs_rejected(rng):
    a = gm.identity(QuadForm.sum_of_squares(7, 3), 1)
    b = gm.identity(QuadForm.sum_of_squares(7, 3), 2)
    with pytest.raises(ValueError):
        gm.hat_add(a, b)
