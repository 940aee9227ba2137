"""Shifted M-ideals: elements (h, J^M_V + f) of Gamma^s(M), the relation ~, sumsets."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .field_linalg import (
    Subspace, is_independent_tuple, matmul_mod, solve_linear, span, vadd, vsub, vec,
)
from .mideal import MIdeal, contains, graded_piece, random_member
from .polyring import BudgetExceeded, PrimePoly, monomials
from .quadform import QuadForm




def _normal_form(M: QuadForm, V: Subspace, f: PrimePoly, s: int) -> PrimePoly:
    pc = graded_piece(M, V, s)
    x = pc.reduce(f.coeff_vector(s), M.p)
    return PrimePoly.from_coeff_vector(x, M.p, M.d, s)


@dataclass(frozen=True)
class GammaElement:
    """(h, J^M_V + f) with h in V and f homogeneous of degree s, f reduced mod J^M_V."""

    M: QuadForm
    s: int
    h: tuple
    V: Subspace
    f: PrimePoly

    @staticmethod
    def make(M: QuadForm, s: int, h, V: Subspace | None = None, f: PrimePoly | None = None) -> "GammaElement":
        p, d = M.p, M.d
        h = vec(h, p)
        if V is None:
            V = span([h], p, d)
        if not V.contains(h):
            raise ValueError("h must lie in V")
        if f is None:
            f = PrimePoly.zero(p, d)
        if not f.is_homogeneous(s):
            raise ValueError(f"f must be homogeneous of degree {s}")
        return GammaElement(M, s, h, V, _normal_form(M, V, f, s))

    @property
    def pi(self) -> tuple:
        return self.h

    def in_gamma_k(self, k: int) -> bool:
        if any(self.h):
            return self.V.dim <= k
        return self.V.dim <= k - 1

    def level(self) -> int:
        """Smallest k with self in Gamma^s_k."""
        return self.V.dim if any(self.h) else self.V.dim + 1

    def sort_key(self):
        return (self.h, self.V.basis, self.f.terms)

    def to_json(self):
        return {"h": list(self.h), "V_basis": [list(r) for r in self.V.basis], "f_text": self.f.to_text()}

    @staticmethod
    def from_json(obj, M: QuadForm, s: int) -> "GammaElement":
        V = span(obj["V_basis"], M.p, M.d)
        return GammaElement.make(M, s, obj["h"], V, PrimePoly.from_text(obj["f_text"], M.p, M.d))


def _check_pair(a: GammaElement, b: GammaElement):
    if a.M != b.M or a.s != b.s:
        raise ValueError("elements from different Gamma^s(M)")


def hat_add(a: GammaElement, b: GammaElement) -> GammaElement:
    _check_pair(a, b)
    p = a.M.p
    return GammaElement.make(a.M, a.s, vadd(a.h, b.h, p), a.V + b.V, a.f + b.f)


def hat_sub(a: GammaElement, b: GammaElement) -> GammaElement:
    _check_pair(a, b)
    p = a.M.p
    return GammaElement.make(a.M, a.s, vsub(a.h, b.h, p), a.V + b.V, a.f - b.f)


def related(a: GammaElement, b: GammaElement) -> bool:
    _check_pair(a, b)
    if a.h != b.h:
        return False
    return contains(MIdeal(a.M, a.V + b.V), a.f - b.f)


def identity(M: QuadForm, s: int) -> GammaElement:
    return GammaElement.make(M, s, (0,) * M.d, Subspace.trivial(M.p, M.d))


def lift(M: QuadForm, s: int, h, f: PrimePoly) -> GammaElement:
    """xi~(h) = (h, J^M_h + f), an element of Gamma^s_1."""
    return GammaElement.make(M, s, h, span([h], M.p, M.d), f)


class GammaSet:
    """Multiset of elements deduplicated only structurally, with a pi-fiber index."""

    def __init__(self, elements=(), M=None, s=None):
        self.elements = []
        self._seen = set()
        self.M, self.s = M, s
        for x in elements:
            self.add(x)

    def add(self, x: GammaElement):
        if self.M is None:
            self.M, self.s = x.M, x.s
        elif (x.M, x.s) != (self.M, self.s):
            raise ValueError("mixed (M, s)")
        key = (x.h, x.V, x.f)
        if key not in self._seen:
            self._seen.add(key)
            self.elements.append(x)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def fibers(self) -> dict:
        out = {}
        for x in self.elements:
            out.setdefault(x.h, []).append(x)
        return dict(sorted(out.items()))

    def fiber(self, h) -> list:
        return [x for x in self.elements if x.h == tuple(h)]

    def sorted(self) -> list:
        return sorted(self.elements, key=GammaElement.sort_key)

    def to_json(self):
        return [x.to_json() for x in self.sorted()]


def sumset(A, B, sign: int = 1, budget: int = 10 ** 6) -> GammaSet:
    if len(A) * len(B) > budget:
        raise BudgetExceeded(len(A) * len(B), budget)
    op = hat_add if sign >= 0 else hat_sub
    out = GammaSet()
    for a in A:
        for b in B:
            out.add(op(a, b))
    return out


def kfold(A, k: int, l: int, budget: int = 10 ** 6) -> GammaSet:
    """kA -^ lA."""
    if k < 1:
        raise ValueError("need k >= 1")
    cur = GammaSet(A)
    for _ in range(k - 1):
        cur = sumset(cur, A, 1, budget)
    for _ in range(l):
        cur = sumset(cur, A, -1, budget)
    return cur


# ---------------------------------------------------------------------------
# Equivalence classes

@dataclass
class ClassVerdict:
    kind: str  # "not-class" | "weak" | "strong"
    witness: GammaElement | None = None
    unrelated_pair: tuple | None = None


def is_weak_class(X) -> tuple:
    X = list(X)
    for i, j in itertools.combinations(range(len(X)), 2):
        if not related(X[i], X[j]):
            return False, (i, j)
    return True, None


def _nf_matrix(M, W: Subspace, s: int) -> np.ndarray:
    """Matrix T (S x S) with x -> x T the normal form modulo the degree-s piece of J_W."""
    pc = graded_piece(M, W, s)
    S = len(monomials(M.d, s))
    T = np.eye(S, dtype=np.int64)
    if pc.dim:
        P = np.zeros((S, pc.dim), dtype=np.int64)
        for j, c in enumerate(pc.pivots):
            P[c, j] = 1
        T = (T - matmul_mod(P, pc.R, M.p)) % M.p
    return T


normal_form_matrix = _nf_matrix


def common_witness(X, h=None):
    """f' with f' - f_i in J_{span{h} + V_i} for every member, or None."""
    X = list(X)
    x0 = X[0]
    M, s, p = x0.M, x0.s, x0.M.p
    h = x0.h if h is None else h
    H = span([h], p, M.d)
    rows, rhs = [], []
    for x in X:
        T = _nf_matrix(M, H + x.V, s)
        rows.append(T.T)
        rhs.append(matmul_mod(x.f.coeff_vector(s).reshape(1, -1), T, p)[0])
    sol = solve_linear(np.vstack(rows), np.concatenate(rhs), p)
    if sol is None:
        return None
    f = PrimePoly.from_coeff_vector(sol.x, p, M.d, s)
    return GammaElement.make(M, s, h, H, f)


def classify_equivalence(X) -> ClassVerdict:
    X = list(X)
    if not X:
        return ClassVerdict("strong", None)
    if len({x.h for x in X}) > 1:
        return ClassVerdict("not-class", None, None)
    weak, pair = is_weak_class(X)
    if not weak:
        return ClassVerdict("not-class", None, pair)
    w = common_witness(X)
    if w is None:
        return ClassVerdict("weak", None)
    assert all(related(w, x) for x in X)
    return ClassVerdict("strong", w)


@dataclass
class DicResult:
    independent: list | None  # indices of the chosen members when found
    W: Subspace | None


def gweakdic(spaces, m: int, U: Subspace) -> DicResult:
    """Greedy search: m members independent modulo U, or W meeting every member beyond U."""
    spaces = list(spaces)
    p, d = U.p, U.d
    chosen = []
    W = U
    if not spaces:
        return DicResult(None, U)
    chosen.append(0)
    W = U + spaces[0]
    while len(chosen) < m:
        nxt = None
        for i, V in enumerate(spaces):
            if i in chosen:
                continue
            if V.intersect(W) == U and is_independent_tuple([spaces[j] for j in chosen] + [V], p, d, modulo=U):
                nxt = i
                break
        if nxt is None:
            return DicResult(None, W)
        chosen.append(nxt)
        W = W + spaces[nxt]
    return DicResult(chosen, None)


def gwts_dims(k: int, s: int, h_zero: bool, part: int = 1, kprime: int | None = None) -> dict:
    kk = k if part == 1 else kprime
    if h_zero:
        K = s + kk
        return {"K": K, "Y_dim_bound": (K - 1) * (k - 1), "d_needed": 2 * kk + 2 * (s + 1) * (k - 2) + 5}
    K = s + kk + 1
    return {"K": K, "Y_dim_bound": (K - 1) * (k - 1) + 1, "d_needed": 2 * kk + 2 * (s + 1) * (k - 2) + 7}


def gwts_check(X, k: int, kprime: int | None = None, s: int | None = None) -> dict:
    """Dichotomy for a weak class: strong, or an obstruction subspace Y."""
    X = list(X)
    x0 = X[0]
    M = x0.M
    s = x0.s if s is None else s
    p, d = M.p, M.d
    h = x0.h
    hz = not any(h)
    dims = gwts_dims(k, s, hz)
    U = Subspace.trivial(p, d) if hz else span([h], p, d)
    res = gweakdic([x.V for x in X], dims["K"], U)
    verdict = classify_equivalence(X)
    rep = {"h_zero": hz, **dims, "d": d, "dimension_hypothesis": d >= dims["d_needed"],
           "in_gamma_k": all(x.in_gamma_k(k) for x in X), "class": verdict.kind}
    if res.independent is not None:
        rep["branch"] = "strong"
        rep["chosen"] = res.independent
        rep["consistent"] = verdict.kind == "strong"
        rep["witness"] = verdict.witness.to_json() if verdict.witness else None
    else:
        Y = res.W
        meets = all(x.V.intersect(Y) != U for x in X)
        rep["branch"] = "obstruction"
        rep["Y_basis"] = [list(r) for r in Y.basis]
        rep["Y_dim"] = Y.dim
        rep["consistent"] = meets and Y.dim <= dims["Y_dim_bound"]
    return rep


# ---------------------------------------------------------------------------
# M-energy

@dataclass
class EnergyGraph:
    H: list
    edges: list  # pairs of index pairs ((i1, i2), (i3, i4))

    @property
    def energy(self) -> int:
        return len(self.edges)


def m_energy(xis, H, M: QuadForm, s: int, budget: int = 10 ** 6) -> EnergyGraph:
    """Energy graph on H^2 of (xi1, xi2, xi3, xi4); each xi maps tuple(h) -> HomPoly."""
    if callable(xis) or isinstance(xis, dict):
        xis = [xis] * 4
    H = [vec(h, M.p) for h in H]
    n = len(H)
    if n ** 4 > budget:
        raise BudgetExceeded(n ** 4, budget)
    get = [(x.__getitem__ if isinstance(x, dict) else x) for x in xis]
    lifts = [[lift(M, s, h, g(h)) for h in H] for g in get]
    left, right = {}, {}
    for i1, i2 in itertools.product(range(n), repeat=2):
        left[(i1, i2)] = hat_sub(lifts[0][i1], lifts[1][i2])
        right[(i1, i2)] = hat_sub(lifts[2][i1], lifts[3][i2])
    by_pi = {}
    for key, x in right.items():
        by_pi.setdefault(x.h, []).append(key)
    edges = []
    for key, a in left.items():
        for key2 in by_pi.get(a.h, []):
            if related(a, right[key2]):
                edges.append((key, key2))
    return EnergyGraph(H, edges)


def m_energy_naive(xis, H, M: QuadForm, s: int) -> int:
    """Four nested loops straight from the definition (oracle)."""
    if callable(xis) or isinstance(xis, dict):
        xis = [xis] * 4
    get = [(x.__getitem__ if isinstance(x, dict) else x) for x in xis]
    H = [vec(h, M.p) for h in H]
    p, d = M.p, M.d
    count = 0
    for h1, h2, h3, h4 in itertools.product(H, repeat=4):
        if vsub(h1, h2, p) != vsub(h3, h4, p):
            continue
        f = get[0](h1) - get[1](h2) - get[2](h3) + get[3](h4)
        if contains(MIdeal(M, span([h1, h2, h3, h4], p, d)), f):
            count += 1
    return count


def random_class_with_witness(M: QuadForm, s: int, h, g: PrimePoly, Vs, rng) -> list:
    """Elements (h, J_{V_i} + g + member of J_{V_i}) all related to (h, J_h + g)."""
    out = []
    for V in Vs:
        noise = random_member(MIdeal(M, V), s, rng)
        out.append(GammaElement.make(M, s, h, V, g + noise))
    return out
