import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from silab import freiman as fr
from silab import mideal as mi
from silab.field_linalg import random_vector, unit
from silab.polyring import PrimePoly, random_homogeneous
from silab.quadform import QuadForm


def test_threshold_values():
    assert fr.N(0) == 7248 and fr.N(1) == 8424
    assert all(fr.N(s) == (2 * s + 16) * (15 * s + 453) for s in range(10))


def test_gap_basics():
    P = fr.GAP.homogeneous(101, [(1, 0)], [10])
    assert P.bounds() == (9,) and P.size() == 19 and P.is_proper()
    assert P.scale(1).elements() == P.elements()
    half = P.scale(Fraction(1, 2))
    assert half.bounds() == (4,) and half.size() == 9
    rep = fr.crescale_check(P, Fraction(1, 2))
    assert rep["holds"] and rep["bound"] == Fraction(19, 5)
    assert fr.GAP.from_json(P.to_json()) == P


def test_improper_gap_detected():
    P = fr.GAP.homogeneous(7, [(1,), (2,)], [3, 3])
    assert not P.is_proper()
    with pytest.raises(ValueError):
        P.index_of()


@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_crescale_and_containment(seed, D):
    r = np.random.default_rng(seed)
    P = fr.random_gap(r, 101, 3, D, max_size=300)
    for c in (Fraction(1, 4), Fraction(1, 2), Fraction(2, 3), Fraction(1), Fraction(5, 2)):
        assert fr.crescale_check(P, c)["holds"]
    assert fr.containment_check(P, Fraction(1, 4), Fraction(1, 4))


def test_bohr_examples():
    p, d = 13, 2
    B = fr.bohr_set([(1, 0)], Fraction(1, 4), p, d)
    assert B.size == 7 * 13
    assert all(min(int(x[0]), p - int(x[0])) <= 3 for x in B.points)
    assert fr.bohr_set([], Fraction(1, 4), p, d).size == p ** d
    assert B.contains((0, 0)) and B.size_bound_holds()
    with pytest.raises(ValueError):
        fr.bohr_set([(1, 0)], Fraction(1, 2), p, d)


def test_additive_quadruple_examples(rng):
    assert fr.count_R([(0, 0)], (0, 0), 5, 2) == 1
    full = [tuple(x) for x in itertools.product(range(5), repeat=2)]
    assert fr.count_R(full, (1, 2), 5, 2) == 5 ** 6
    H = list({random_vector(rng, 11, 2) for _ in range(50)})
    for _ in range(5):
        h = random_vector(rng, 11, 2)
        assert fr.count_R(H, h, 11, 2) == fr.count_R_naive(H, h, 11)


def test_large_spectrum_structure(rng):
    for p, d in [(7, 2), (11, 2), (5, 3)]:
        H = [tuple(x) for x in itertools.product(range(p), repeat=d) if rng.random() < 0.3]
        assert fr.g324_check(np.array(H), p, d)["ok"]


def test_carry_example():
    p = 13
    f = fr.AlmostLinearFn.carry_example(p, (1, 0))
    pts = list(itertools.product(range(p), repeat=2))
    assert f.lands_in_zp(pts)[0]
    half = [h for h in pts if 2 * h[0] < p]
    assert f.is_freiman_hom(half)[0]
    ok, quad = f.is_freiman_hom(pts)
    assert not ok
    h1, h2, g1, g2 = quad
    assert tuple((a + b) % p for a, b in zip(h1, h2)) == tuple((a + b) % p for a, b in zip(g1, g2))
    assert (f.value(h1) + f.value(h2)) % 1 != (f.value(g1) + f.value(g2)) % 1


def test_not_in_zp():
    f = fr.AlmostLinearFn(7, [(1,)], [1])
    with pytest.raises(fr.NotInZp):
        f.value((1,))


def test_super_poly_examples(rng):
    p, d = 7, 3
    C0 = random_homogeneous(rng, p, d, 2)
    F = fr.SuperPoly.make(p, d, 2, 2, {(0, 0): C0})
    x = PrimePoly.var(0, p, d)
    assert fr.super_eval(F, [x, x]) == C0
    sq = fr.SuperPoly.make(p, d, 1, 2, {(2,): PrimePoly.const(1, p, d)})
    M = QuadForm.sum_of_squares(p, d)
    L = M.linear_form(unit(0, d))
    assert fr.super_at(sq, M, [unit(0, d)]) == L * L
    with pytest.raises(ValueError):
        fr.super_eval(sq, [x, x])
    for sym in (True, False):
        G = fr.SuperPoly.random(rng, p, d, 2, 2, symmetric=sym)
        a, b = M.linear_form(unit(0, d)), M.linear_form(unit(1, d))
        same = fr.super_eval(G, [a, b]) == fr.super_eval(G, [b, a])
        assert G.is_symmetric() == sym
        if sym:
            assert same


def _ll_instance(rng, p=13, d=3, s=2, D=2, noise=True):
    M = QuadForm.random_nondegenerate(rng, p, d)
    P = fr.random_gap(rng, p, d, D, max_size=40)
    xi, fs = fr.random_locally_linear(rng, P, M, s, noise=noise)
    return M, P, xi, fs


def test_locally_linear_is_order4(rng):
    for _ in range(5):
        M, P, xi, _ = _ll_instance(rng)
        rep = fr.is_freiman_hom(xi, list(xi), M, n=2)
        assert rep.holds and rep.mode == "exhaustive"
        assert fr.freiman4_naive(xi, list(xi), M)[0]


def test_constant_map_any_order(rng):
    M = QuadForm.sum_of_squares(11, 3)
    H = [random_vector(rng, 11, 3) for _ in range(8)]
    f0 = random_homogeneous(rng, 11, 3, 1)
    xi = {h: f0 for h in H}
    for n in (1, 2, 3):
        assert fr.is_freiman_hom(xi, H, M, n=n).holds


def test_random_map_fails_with_quadruple(rng):
    p, d, s = 7, 5, 1
    M = QuadForm.sum_of_squares(p, d)
    base = [random_vector(rng, p, d) for _ in range(4)]
    H = base + [tuple((a + b - c) % p for a, b, c in zip(base[0], base[1], base[2]))]
    H += [tuple((a + b - c) % p for a, b, c in zip(base[0], base[3], base[1]))]
    H += [random_vector(rng, p, d) for _ in range(2)]
    xi = {h: random_homogeneous(rng, p, d, s) for h in H}
    rep = fr.is_freiman_hom(xi, H, M)
    naive, quad = fr.freiman4_naive(xi, H, M)
    assert rep.holds == naive
    assert not rep.holds and rep.counterexample is not None
    left, right = rep.counterexample
    assert tuple(sum(x) % p for x in zip(*left)) == tuple(sum(x) % p for x in zip(*right))


def test_fit_roundtrip(rng):
    for noise in (False, True):
        M, P, xi, fs = _ll_instance(rng, noise=noise)
        fit = fr.fit_locally_linear(xi, P, M)
        assert fit.feasible and fit.residual_failures == 0


def test_fit_detects_bump(rng):
    M, P, xi, _ = _ll_instance(rng)
    pts = sorted(xi)
    h = next(x for x in pts if any(x))
    bumped = dict(xi)
    g = mi.random_nonmember(mi.MIdeal.of(M, [h]), 2, rng)
    bumped[h] = xi[h] + g
    fit = fr.fit_locally_linear(bumped, P, M)
    assert not fit.feasible
    assert fit.witness == h and fit.witness_certified


def test_freiman_report_json(rng):
    M, P, xi, _ = _ll_instance(rng)
    js = fr.is_freiman_hom(xi, list(xi), M, n=2).to_json()
    assert set(js) >= {"mode", "tuples_checked", "counterexample", "seed"}


def test_sampled_mode_records_seed(rng):
    M, P, xi, _ = _ll_instance(rng)
    rep = fr.is_freiman_hom(xi, list(xi), M, n=3, budget=1, samples=200, seed=7)
    assert rep.mode == "sampled" and rep.seed == 7 and rep.holds


@pytest.mark.parametrize("which", ["coco01", "coco1c", "cocon1", "cocozero", "cocoprr", "coco4"])
def test_cocycle_forward_modes(which, rng):
    M = QuadForm.random_nondegenerate(rng, 11, 5)
    rep = fr.verify_cocycle_lemmas(which, M, 2, rng)
    assert rep.ok and rep.failures == 0 and rep.checks > 0


def test_cocozero_inverse_example(rng):
    M = QuadForm.sum_of_squares(7, 7)
    good = fr.verify_cocycle_lemmas("cocozero", M, 1, rng, k=1)
    assert good.ok
    broken = fr.verify_cocycle_lemmas("cocozero", M, 1, rng, k=1, break_one=True)
    assert broken.ok and broken.failures > 0 and broken.details.get("witness") is not None


def test_coco01_inverse_solves(rng):
    M = QuadForm.sum_of_squares(11, 5)
    G = random_homogeneous(rng, 11, 5, 2)
    F = {}
    for _ in range(6):
        x = random_vector(rng, 11, 5, nonzero=True)
        F[x] = G + mi.random_member(mi.MIdeal.of(M, [x]), 2, rng)
    rep = fr.coco01_inverse(M, 2, F)
    assert rep["hypothesis"] and rep["solved"]
    for x, f in F.items():
        assert mi.contains(mi.MIdeal.of(M, [x]), f - rep["G"])


def test_cocon2_and_gsol(rng):
    M = QuadForm.random_nondegenerate(rng, 13, 3)
    vs = [(1, 0, 0), (0, 1, 0)]
    P = fr.GAP.homogeneous(13, vs, [4, 4])
    rep = fr.verify_cocycle_lemmas("cocon2", M, 3, rng, P=P)
    assert rep.ok and rep.checks > 0
    Q = fr.random_gap(rng, 13, 3, 2, max_size=40)
    assert fr.verify_cocycle_lemmas("gsol", M, 2, rng, P=Q).ok
