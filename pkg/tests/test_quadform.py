import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from silab import quadform as qf
from silab.field_linalg import Subspace, random_subspace, random_vector, span, unit
from silab.polyring import BudgetExceeded
from silab.quadform import QuadForm
from oracles import all_points, naive_rank


def test_rank_examples():
    assert qf.rank(QuadForm.sum_of_squares(7, 4)) == 4
    assert qf.rank(QuadForm(7, ((0, 0), (0, 0)))) == 0
    assert qf.rank(QuadForm.diagonal(5, (1, 1, 0))) == 2


def test_restricted_rank_examples():
    M = QuadForm.sum_of_squares(7, 5)
    assert qf.restricted_rank(M, Subspace.full(7, 5)) == 5
    assert qf.restricted_rank(M, Subspace.trivial(7, 5)) == 0


@given(st.integers(0, 10 ** 6))
def test_restricted_rank_against_parametrization(seed):
    r = np.random.default_rng(seed)
    p, d = 7, 5
    M = QuadForm.random_nondegenerate(r, p, d)
    V = random_subspace(r, p, d, int(r.integers(1, d + 1)))
    c = random_vector(r, p, d)
    # oracle: second differences of t -> M(tB + c) recover the Gram matrix of the composition
    B = np.array(V.basis)
    k = V.dim

    def g(t):
        return M.evaluate(tuple(int(x) for x in (np.array(t) @ B + np.array(c)) % p))

    half = pow(2, -1, p)
    G = [[0] * k for _ in range(k)]
    z = (0,) * k
    for i in range(k):
        for j in range(k):
            ei = tuple(1 if a == i else 0 for a in range(k))
            ej = tuple(1 if a == j else 0 for a in range(k))
            eij = tuple(x + y for x, y in zip(ei, ej))
            G[i][j] = (g(eij) - g(ei) - g(ej) + g(z)) * half % p
    assert qf.restricted_rank(M, V, c) == naive_rank(G, p)


def test_perp_examples():
    M = QuadForm.sum_of_squares(7, 4)
    assert qf.perp(M, Subspace.trivial(7, 4)) == Subspace.full(7, 4)
    assert qf.perp(M, span([unit(0, 4)], 7, 4)) == span([unit(1, 4), unit(2, 4), unit(3, 4)], 7, 4)


@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_isotropy_against_pointwise(seed, k):
    r = np.random.default_rng(seed)
    p, d = 5, 4
    M = QuadForm.random_nondegenerate(r, p, d)
    V = random_subspace(r, p, d, k)
    pts = [tuple(x) for x in V.points().tolist()]
    iso = [x for x in pts if all(M.bilinear(x, y) == 0 for y in pts)]
    assert len(iso) == p ** qf.isotropic_dim(M, V)


def test_degenerate_zero_form_counts_everything():
    M = QuadForm(5, ((0, 0, 0),) * 3)
    V = span([(1, 0, 0), (0, 1, 1)], 5, 3)
    assert qf.count_variety_affine(M, V, (1, 2, 3)).count == 25


@pytest.mark.parametrize("p", [5, 7])
def test_count_against_enumeration(p):
    d = 4
    M = QuadForm.sum_of_squares(p, d)
    brute = sum(1 for x in all_points(p, d) if sum(a * a for a in x) % p == 0)
    rep = qf.count_variety_affine(M, Subspace.full(p, d))
    assert rep.count == brute
    if p == 5:
        assert abs(rep.count - 125) <= 25


def test_count_restricted_to_hyperplane(rng):
    p, d = 7, 5
    M = QuadForm.sum_of_squares(p, d)
    seen = 0
    for _ in range(20):
        V = random_subspace(rng, p, d, 4)
        if qf.is_isotropic(M, V):
            continue
        rep = qf.count_variety_affine(M, V)
        assert abs(rep.deviation) ** 2 * p <= 4
        seen += 1
    assert seen


def test_common_variety_example():
    p, d = 7, 5
    M = QuadForm.sum_of_squares(p, d)
    rep = qf.count_common_variety(M, [unit(0, d)])
    brute = sum(1 for x in all_points(p, d)
                if sum(a * a for a in x) % p == 0 and ((x[0] + 1) ** 2 + sum(a * a for a in x[1:])) % p == 0)
    assert rep.count == brute
    assert abs(rep.count - 343) <= 7 ** 2.5
    assert qf.count_common_variety(M, []).count == qf.count_variety_affine(M, Subspace.full(p, d)).count


def test_dependent_shifts_flagged():
    M = QuadForm.sum_of_squares(5, 4)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        rep = qf.count_common_variety(M, [unit(0, 4), (2, 0, 0, 0)])
    assert rep.dependent and w
    assert rep.count >= 0


def test_count_budget():
    with pytest.raises(BudgetExceeded):
        qf.count_common_variety(QuadForm.sum_of_squares(11, 5), [], budget=1000)


def test_isotropic_fraction_exact_one_tuples():
    p, d = 5, 4
    M = QuadForm.sum_of_squares(p, d)
    frac, exact = qf.isotropic_tuple_fraction(M, 1)
    assert exact
    brute = sum(1 for h in all_points(p, d) if sum(a * a for a in h) % p == 0)
    assert frac == Fraction(brute, p ** d)
    assert qf.is_isotropic_tuple(M, [(0,) * d, unit(0, d)])


def test_isotropic_pairs_small_constant(rng):
    for p in (5, 7, 11):
        frac, _ = qf.isotropic_tuple_fraction(QuadForm.sum_of_squares(p, 4), 2, sample=1500, rng=rng, budget=0)
        assert frac * p <= 4


def test_json_roundtrip(rng):
    M = QuadForm.random_nondegenerate(rng, 11, 4)
    assert QuadForm.from_json(M.to_json()) == M
    N = QuadForm(11, M.A, (1, 2, 3, 4), 5)
    assert QuadForm.from_json(N.to_json()) == N


@given(st.integers(0, 10 ** 6))
def test_difference_form_and_shift(seed):
    r = np.random.default_rng(seed)
    p, d = 7, 3
    M = QuadForm(p, QuadForm.random_nondegenerate(r, p, d).A, random_vector(r, p, d), 3)
    h = random_vector(r, p, d)
    for _ in range(10):
        n = random_vector(r, p, d)
        nh = tuple((a + b) % p for a, b in zip(n, h))
        assert M.difference_form(h).eval(n) == (M(nh) - M(n)) % p
        assert M.shifted(h)(n) == M(nh)
        assert M.as_poly().eval(n) == M(n)
