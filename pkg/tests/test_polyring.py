import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from silab.polyring import (
    BudgetExceeded, PrimePoly, is_zero_by_sampling, monomials, random_homogeneous, random_poly, variety,
)
from oracles import peval, pmul, padd


def polys(p, d, max_deg=3):
    exps = st.tuples(*[st.integers(0, max_deg)] * d).filter(lambda e: sum(e) <= max_deg)
    return st.dictionaries(exps, st.integers(0, p - 1), max_size=6).map(lambda c: PrimePoly.from_dict(c, p, d))


P, D = 7, 3


@given(polys(P, D), polys(P, D), polys(P, D))
def test_ring_laws(f, g, h):
    assert f + g == g + f
    assert f * g == g * f
    assert (f + g) + h == f + (g + h)
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f - f == PrimePoly.zero(P, D)


@given(polys(P, D), polys(P, D))
def test_product_matches_oracle(f, g):
    assert (f * g).as_dict() == pmul(f.as_dict(), g.as_dict(), P)
    assert (f + g).as_dict() == padd(f.as_dict(), g.as_dict(), P)


@given(polys(5, 3, 4), st.tuples(*[st.integers(0, 4)] * 3))
def test_eval_matches_naive(f, x):
    assert f.eval(x) == peval(f.as_dict(), x, 5)


def test_eval_examples():
    assert PrimePoly.zero(7, 3).eval((1, 2, 3)) == 0
    f = PrimePoly.var(0, 7, 3) * PrimePoly.var(1, 7, 3)
    assert f.eval((2, 3, 0)) == 6


@given(polys(P, D))
def test_eval_many_agrees(f):
    pts = np.array(list(itertools.product(range(P), repeat=D)))
    assert f.eval_many(pts).tolist() == [f.eval(tuple(x)) for x in pts]


@given(polys(P, D))
def test_text_roundtrip(f):
    assert PrimePoly.from_text(f.to_text(), P, D) == f


@given(st.integers(0, 3), st.integers(0, 10 ** 6))
def test_coeff_vector_roundtrip(s, seed):
    f = random_homogeneous(np.random.default_rng(seed), P, D, s)
    v = f.coeff_vector(s)
    assert len(v) == len(monomials(D, s))
    assert PrimePoly.from_coeff_vector(v, P, D, s) == f


def test_monomial_count():
    from math import comb
    for d in range(1, 5):
        for s in range(5):
            assert len(monomials(d, s)) == comb(d + s - 1, s)


def test_variety_examples():
    assert len(variety(PrimePoly.zero(5, 2))) == 25
    assert len(variety(PrimePoly.var(0, 5, 2))) == 5
    x, y = PrimePoly.var(0, 5, 2), PrimePoly.var(1, 5, 2)
    assert len(variety(x * x + y * y)) == 9


def test_variety_budget():
    with pytest.raises(BudgetExceeded):
        variety(PrimePoly.var(0, 11, 4), budget=100)


@given(st.integers(0, 10 ** 6))
def test_substitute_linear_is_composition(seed):
    r = np.random.default_rng(seed)
    p, d = 5, 3
    f = random_poly(r, p, d, 3)
    T = r.integers(0, p, size=(2, d))
    c = r.integers(0, p, size=d)
    g = f.substitute_linear(T, c)
    for t in itertools.product(range(p), repeat=2):
        x = (np.array(t) @ T + c) % p
        assert g.eval(t) == f.eval(tuple(int(a) for a in x))


def test_zero_test_verdicts():
    z = is_zero_by_sampling(PrimePoly.zero(11, 3), 5)
    assert z.is_zero and z.exact
    v = is_zero_by_sampling(PrimePoly.var(0, 11, 3), 20, np.random.default_rng(0))
    assert not v.is_zero and PrimePoly.var(0, 11, 3).eval(v.witness) != 0


def test_zero_test_matches_enumeration(rng):
    for _ in range(20):
        f = random_poly(rng, 11, 3, 3)
        v = is_zero_by_sampling(f, 20, rng)
        full = all(f.eval(x) == 0 for x in itertools.product(range(11), repeat=3))
        if not v.is_zero:
            assert not full
        else:
            assert full or v.failure_bound > 0
    # a nonzero form vanishing on a large set still has a witness under enumeration
    f = PrimePoly.var(0, 11, 3) * PrimePoly.var(1, 11, 3)
    v = is_zero_by_sampling(f, 1, rng, budget=11 ** 3)
    assert not v.is_zero and v.exact and f.eval(v.witness)


def test_homogeneity_and_degree():
    f = random_homogeneous(np.random.default_rng(3), 7, 3, 2)
    assert f.is_homogeneous(2) and f.degree() == 2
    assert PrimePoly.zero(7, 3).degree() == -1
