"""M-ideals J^M_V = <(nA).n, (hA).n : h in V> and membership by linear algebra.

J^M_V is homogeneous, so f belongs to it iff each homogeneous component f_t
lies in the degree-t piece, which is spanned by Q*HP(t-2) and G_h*HP(t-1) with
Q(n) = (nA).n and G_h(n) = (hA).n for h running over a basis of V.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .field_linalg import (
    Subspace, is_independent_tuple, matmul_mod, reduce_rows, rref, solve_linear, span,
)
from .polyring import PrimePoly, monomial_index, monomials, monomials_up_to, random_homogeneous
from .quadform import QuadForm, common_variety_points, cone_points, perp, restricted_rank

# Mutation hook for the smoke test: when set, membership of the zero polynomial is reported False.
MUTATE_ZERO_MEMBERSHIP = False


@dataclass(frozen=True)
class MIdeal:
    M: QuadForm
    V: Subspace

    def __post_init__(self):
        if (self.M.p, self.M.d) != (self.V.p, self.V.d):
            raise ValueError("M and V live over different spaces")

    @staticmethod
    def of(M: QuadForm, vectors=()) -> "MIdeal":
        return MIdeal(M, span(list(vectors), M.p, M.d))

    @property
    def p(self):
        return self.M.p

    @property
    def d(self):
        return self.M.d

    def __add__(self, other: "MIdeal") -> "MIdeal":
        if other.M != self.M:
            raise ValueError("different quadratic forms")
        return MIdeal(self.M, self.V + other.V)

    def generators(self) -> list:
        return [self.M.quadratic_part()] + [self.M.linear_form(h) for h in self.V.basis]


@dataclass(frozen=True)
class Piece:
    """Degree-t homogeneous piece of an ideal, as an RREF row space."""

    t: int
    R: np.ndarray
    pivots: tuple
    gens: np.ndarray  # unreduced generator rows, used for certificates
    labels: tuple  # (generator index, multiplier monomial) per row of gens

    @property
    def dim(self):
        return len(self.pivots)

    def reduce(self, x: np.ndarray, p: int) -> np.ndarray:
        return reduce_rows(x, self.R, list(self.pivots), p)

    def subspace(self, p: int, ncols: int) -> Subspace:
        return Subspace(p, ncols, tuple(tuple(int(x) for x in row) for row in self.R))


def _rows_for(gens, d, p, t, extra_degs=None):
    idx = monomial_index(d, t)
    rows, labels = [], []
    for gi, g in enumerate(gens):
        gdeg = g.degree()
        if gdeg < 0 or gdeg > t:
            continue
        for q in monomials(d, t - gdeg):
            row = np.zeros(len(idx), dtype=np.int64)
            for e, c in g.terms:
                row[idx[tuple(a + b for a, b in zip(e, q))]] += c
            rows.append(row % p)
            labels.append((gi, q))
    if rows:
        return np.array(rows, dtype=np.int64), tuple(labels)
    return np.zeros((0, len(idx)), dtype=np.int64), ()


@lru_cache(maxsize=8192)
def graded_piece(M: QuadForm, V: Subspace, t: int) -> Piece:
    d, p = M.d, M.p
    gens = [M.quadratic_part()] + [M.linear_form(h) for h in V.basis]
    G, labels = _rows_for(gens, d, p, t)
    if G.shape[0]:
        R, piv = rref(G, p)
    else:
        R, piv = G, []
    return Piece(t, R, tuple(piv), G, labels)


@dataclass
class GradedIdealBasis:
    ideal: MIdeal
    s: int
    pieces: dict

    @property
    def dim(self):
        return sum(pc.dim for pc in self.pieces.values())

    def rows(self) -> list:
        """Row space generators as polynomials, degree by degree."""
        out = []
        for t, pc in self.pieces.items():
            for r in pc.R:
                out.append(PrimePoly.from_coeff_vector(r, self.ideal.p, self.ideal.d, t))
        return out

    def contains_subspace_of(self, other: "GradedIdealBasis") -> bool:
        """Row space of other inside row space of self."""
        p = self.ideal.p
        for t, pc in other.pieces.items():
            if pc.dim and np.any(self.pieces[t].reduce(pc.R, p)):
                return False
        return True

    def __eq__(self, other):
        return (self.s == other.s and self.ideal.d == other.ideal.d
                and all(np.array_equal(self.pieces[t].R, other.pieces[t].R) for t in self.pieces))


def graded_basis(I: MIdeal, s: int) -> GradedIdealBasis:
    if not I.M.is_homogeneous:
        raise ValueError("graded membership needs a homogeneous quadratic form")
    return GradedIdealBasis(I, s, {t: graded_piece(I.M, I.V, t) for t in range(s + 1)})


def reduce_homogeneous(I: MIdeal, f: PrimePoly, t: int) -> np.ndarray:
    """Normal form of a degree-t homogeneous polynomial modulo the degree-t piece."""
    pc = graded_piece(I.M, I.V, t)
    return pc.reduce(f.coeff_vector(t), I.p)


def contains(I: MIdeal, f: PrimePoly, s_hint: int | None = None, certificate: bool = False):
    """Membership f in J^M_V. With certificate=True returns a Membership record."""
    if f.is_zero() and MUTATE_ZERO_MEMBERSHIP:
        return Membership(False, None) if certificate else False
    if certificate:
        cert = decompose(I, f)
        return Membership(cert is not None, cert)
    for t, comp in f.components().items():
        if np.any(reduce_homogeneous(I, comp, t)):
            return False
    return True


def contains_vec(I: MIdeal, x: np.ndarray, t: int) -> bool:
    return not np.any(graded_piece(I.M, I.V, t).reduce(x, I.p))


@dataclass(frozen=True)
class Certificate:
    P0: PrimePoly
    Ps: tuple  # one multiplier per basis vector of V

    def recombine(self, I: MIdeal) -> PrimePoly:
        out = I.M.quadratic_part() * self.P0
        for h, P in zip(I.V.basis, self.Ps):
            out = out + I.M.linear_form(h) * P
        return out


@dataclass(frozen=True)
class Membership:
    member: bool
    certificate: Certificate | None

    def __bool__(self):
        return self.member


def decompose(I: MIdeal, f: PrimePoly):
    """Return a verified Certificate (P0, [P_i]) with f = Q*P0 + sum G_{h_i} P_i, or None."""
    p, d = I.p, I.d
    k = I.V.dim
    P0 = PrimePoly.zero(p, d)
    Ps = [PrimePoly.zero(p, d) for _ in range(k)]
    for t, comp in f.components().items():
        pc = graded_piece(I.M, I.V, t)
        if pc.gens.shape[0] == 0:
            return None
        sol = solve_linear(pc.gens.T, comp.coeff_vector(t), p)
        if sol is None:
            return None
        for coef, (gi, q) in zip(sol.x, pc.labels):
            if coef:
                term = PrimePoly.monomial(q, coef, p, d)
                if gi == 0:
                    P0 = P0 + term
                else:
                    Ps[gi - 1] = Ps[gi - 1] + term
    cert = Certificate(P0, tuple(Ps))
    if cert.recombine(I) != f:
        raise AssertionError("certificate does not recombine to f")
    return cert


def vanishing_contains(I: MIdeal, f: PrimePoly, budget: int = 10 ** 8) -> bool:
    """Secondary oracle: f vanishes on {n in V^perp : (nA).n = 0}."""
    pts = cone_points(QuadForm(I.p, I.M.A), I.V, budget)
    chunk = 1 << 16
    for i in range(0, pts.shape[0], chunk):
        if np.any(f.eval_many(pts[i:i + chunk])):
            return False
    return True


def noloop_regime(I: MIdeal) -> bool:
    """rank(M restricted to V^perp) >= 3, the regime where both oracles must agree."""
    return restricted_rank(I.M, perp(I.M, I.V)) >= 3


# ---------------------------------------------------------------------------
# Difference-form ideal <M(n), M(n+h_i) - M(n)>, the affine statement of the
# Nullstellensatz-type decomposition.  Not homogeneous, so rows live on all
# monomials of degree <= s.

def _difference_rows(M: QuadForm, hs, s: int):
    d, p = M.d, M.p
    cols = monomials_up_to(d, s)
    idx = {m: i for i, m in enumerate(cols)}
    gens = [M.as_poly()] + [M.difference_form(h) for h in hs]
    rows, labels = [], []
    for gi, g in enumerate(gens):
        gdeg = g.degree()
        for q in monomials_up_to(d, s - gdeg) if gdeg >= 0 else []:
            row = np.zeros(len(cols), dtype=np.int64)
            for e, c in g.terms:
                row[idx[tuple(a + b for a, b in zip(e, q))]] += c
            rows.append(row % p)
            labels.append((gi, q))
    G = np.array(rows, dtype=np.int64) if rows else np.zeros((0, len(cols)), dtype=np.int64)
    return G, labels, cols


def difference_decompose(M: QuadForm, hs, f: PrimePoly, s: int | None = None):
    """f = M*P0 + sum (M(n+h_i)-M(n)) P_i with deg P0 <= s-2, deg P_i <= s-1, or None."""
    s = f.degree() if s is None else s
    p, d = M.p, M.d
    if f.is_zero():
        return PrimePoly.zero(p, d), tuple(PrimePoly.zero(p, d) for _ in hs)
    G, labels, cols = _difference_rows(M, hs, s)
    rhs = np.zeros(len(cols), dtype=np.int64)
    pos = {m: i for i, m in enumerate(cols)}
    for e, c in f.terms:
        rhs[pos[e]] = c
    if G.shape[0] == 0:
        return None
    sol = solve_linear(G.T, rhs, p)
    if sol is None:
        return None
    P0 = PrimePoly.zero(p, d)
    Ps = [PrimePoly.zero(p, d) for _ in hs]
    for coef, (gi, q) in zip(sol.x, labels):
        if coef:
            term = PrimePoly.monomial(q, coef, p, d)
            if gi == 0:
                P0 = P0 + term
            else:
                Ps[gi - 1] = Ps[gi - 1] + term
    back = M.as_poly() * P0
    for h, P in zip(hs, Ps):
        back = back + M.difference_form(h) * P
    if back != f:
        raise AssertionError("difference certificate does not recombine")
    return P0, tuple(Ps)


def difference_vanishing(M: QuadForm, hs, f: PrimePoly, budget: int = 10 ** 8) -> bool:
    pts = common_variety_points(M, hs, budget)
    return not np.any(f.eval_many(pts)) if pts.shape[0] else True


# ---------------------------------------------------------------------------
# Intersection properties

def intersection_of_sums(V: Subspace, Vs) -> Subspace:
    out = None
    for W in Vs:
        S = V + W
        out = S if out is None else out.intersect(S)
    return V if out is None else out


def verify_intersection_subspaces(V: Subspace, Vs) -> bool:
    return intersection_of_sums(V, Vs) == V


def intersection_piece(M: QuadForm, Vs, t: int) -> Subspace:
    """∩_i (J^M_{V_i} ∩ HP(t)) as a subspace of the degree-t coefficient space."""
    ncols = len(monomials(M.d, t))
    out = None
    for W in Vs:
        S = graded_piece(M, W, t).subspace(M.p, ncols)
        out = S if out is None else out.intersect(S)
    return out


def intersection_contains(M: QuadForm, Vs, f: PrimePoly) -> bool:
    return all(contains(MIdeal(M, W), f) for W in Vs)


def gr0_hypotheses(M: QuadForm, V: Subspace, Vs, s: int, weak: bool = False) -> dict:
    """Hypotheses of the strong (default) or weak intersection property."""
    p, d = M.p, M.d
    N, m = len(Vs), V.dim
    r = max((W.dim for W in Vs), default=0)
    nontrivial = [W for W in Vs if not W.is_trivial()]
    petals_indep = is_independent_tuple(Vs, p, d)
    all_indep = is_independent_tuple([V] + list(Vs), p, d)
    need = 2 * N * (r - 1) + 7
    rank_ok = restricted_rank(M, perp(M, V)) >= need or d >= 2 * m + need
    out = {
        "N": N, "m": m, "r": r, "s": s,
        "nondegenerate": M.is_nondegenerate(),
        "petals_independent": petals_indep,
        "all_independent": all_indep,
        "rank_or_dimension": rank_ok,
        "petals_nontrivial": len(nontrivial) == N,
    }
    if weak:
        out["N_large"] = N >= s + m + 1
        out["holds"] = out["nondegenerate"] and petals_indep and rank_ok and out["N_large"]
    else:
        out["N_large"] = N >= s + 1
        out["holds"] = out["nondegenerate"] and all_indep and rank_ok and out["N_large"]
    return out


def verify_intersection_ideals(M: QuadForm, V: Subspace, Vs, f: PrimePoly | None, s: int,
                               weak: bool = False) -> dict:
    """Compare ∩ J_{V+V_i} with J_V degree by degree up to s (and on f if given)."""
    hyp = gr0_hypotheses(M, V, Vs, s, weak)
    sums = [V + W for W in Vs]
    equal = True
    witness = None
    for t in range(s + 1):
        ncols = len(monomials(M.d, t))
        lhs = intersection_piece(M, sums, t)
        rhs = graded_piece(M, V, t).subspace(M.p, ncols)
        if not lhs.contains_subspace(rhs):
            raise AssertionError("J_V must lie in every J_{V+V_i}")
        if lhs != rhs:
            equal = False
            for b in lhs.basis:
                if not rhs.contains(b):
                    witness = PrimePoly.from_coeff_vector(b, M.p, M.d, t)
                    break
            break
    rep = {"hypotheses": hyp, "pieces_equal": equal,
           "counterexample": witness.to_text() if witness is not None else None}
    if f is not None:
        left = intersection_contains(M, sums, f)
        right = contains(MIdeal(M, V), f)
        rep["f_in_intersection"] = left
        rep["f_in_JV"] = right
        if right and not left:
            raise AssertionError("reverse inclusion violated")
        equal = equal and (left == right)
    if hyp["holds"]:
        rep["outcome"] = "pass" if equal else "fail"
    else:
        rep["outcome"] = "hypothesis-not-met"
    rep["biconditional"] = equal
    return rep


def verify_grm(M: QuadForm, V: Subspace, Us, P, f: PrimePoly, m: int, rng=None,
               samples: int = 200) -> dict:
    """Density version: hypothesis sampled over independent m-tuples from P."""
    p, d = M.p, M.d
    if rng is None:
        rng = np.random.default_rng(0)
    P = [tuple(x) for x in P]
    Us = [Subspace.trivial(p, d)] + list(Us)
    hyp_fail = None
    checked = 0
    for _ in range(samples * 4):
        if checked >= samples:
            break
        hs = [P[int(i)] for i in rng.integers(0, len(P), size=m)]
        if not all(is_independent_tuple(list(hs) + [U, V], p, d) for U in Us):
            continue
        checked += 1
        if not contains(MIdeal(M, span(hs, p, d) + V), f):
            hyp_fail = hs
            break
    conclusion = contains(MIdeal(M, V), f)
    dims_ok = True
    if Us[1:]:
        dk = Us[-1].dim
    else:
        dk = 0
    s = max(f.degree(), 0)
    dprime_needed = max(V.dim + m + s, dk + V.dim + m, 2 * V.dim + 2 * m + 5)
    rep = {"tuples_checked": checked, "hypothesis_holds": hyp_fail is None,
           "hypothesis_witness": [list(h) for h in hyp_fail] if hyp_fail else None,
           "conclusion": conclusion, "dprime_needed": dprime_needed, "dims_ok": dims_ok}
    if hyp_fail is not None:
        rep["outcome"] = "hypothesis-not-met"
    else:
        rep["outcome"] = "pass" if conclusion else "fail"
    return rep


def killL_check(M: QuadForm, h, hs, f: PrimePoly) -> dict:
    """If (nA).h * f lies in J_{hs} then f lies in J_{hs}."""
    p, d = M.p, M.d
    I = MIdeal(M, span(hs, p, d)) if hs else MIdeal(M, Subspace.trivial(p, d))
    premise = contains(I, M.linear_form(h) * f)
    conclusion = contains(I, f)
    W = span(list(hs) + [h], p, d)
    regime = restricted_rank(M, perp(M, W)) >= 3 or d >= 2 * len(hs) + 5
    indep = is_independent_tuple(list(hs) + [h], p, d)
    return {"premise": premise, "conclusion": conclusion, "regime": regime and indep,
            "ok": (not premise) or conclusion or not (regime and indep)}


def shape_space(M: QuadForm, V_basis, petal_bases, s: int) -> Subspace:
    """Span of the degree-s polynomials Q*HP(s-2) + sum G_h*HP(s-1) + (prod over petals) * HP(s-N)."""
    p, d = M.p, M.d
    gens = [M.quadratic_part()] + [M.linear_form(h) for h in V_basis]
    N = len(petal_bases)
    if N and all(petal_bases):
        for choice in itertools.product(*petal_bases):
            g = PrimePoly.const(1, p, d)
            for h in choice:
                g = g * M.linear_form(h)
            gens.append(g)
    G, _ = _rows_for(gens, d, p, s)
    ncols = len(monomials(d, s))
    return span(G.tolist(), p, ncols) if G.shape[0] else Subspace.trivial(p, ncols)


def w3s_roundtrip(M: QuadForm, V: Subspace, Vs, s: int, rng, trials: int = 5) -> dict:
    """Random f in ∩ J_{V+V_i} (degree s) must have the product-shape decomposition."""
    p = M.p
    sums = [V + W for W in Vs]
    inter = intersection_piece(M, sums, s)
    shape = shape_space(M, list(V.basis), [list(W.basis) for W in Vs], s)
    fails = 0
    for _ in range(trials):
        if inter.is_trivial():
            break
        coeffs = rng.integers(0, p, size=inter.dim)
        x = matmul_mod(np.array(coeffs, dtype=np.int64).reshape(1, -1), inter.matrix(), p)[0]
        if not shape.contains(tuple(int(c) for c in x)):
            fails += 1
    # the shape space must also sit inside the intersection
    inside = inter.contains_subspace(shape) if not shape.is_trivial() else True
    return {"intersection_dim": inter.dim, "shape_dim": shape.dim, "fails": fails,
            "shape_inside": inside, "equal": inside and shape.dim == inter.dim}


def random_member(I: MIdeal, t: int, rng) -> PrimePoly:
    """A random element of the degree-t piece."""
    pc = graded_piece(I.M, I.V, t)
    if pc.dim == 0:
        return PrimePoly.zero(I.p, I.d)
    c = rng.integers(0, I.p, size=pc.dim)
    x = matmul_mod(np.array(c, dtype=np.int64).reshape(1, -1), pc.R, I.p)[0]
    return PrimePoly.from_coeff_vector(x, I.p, I.d, t)


def random_nonmember(I: MIdeal, t: int, rng, tries: int = 100) -> PrimePoly | None:
    for _ in range(tries):
        f = random_homogeneous(rng, I.p, I.d, t)
        if not contains(I, f):
            return f
    return None
