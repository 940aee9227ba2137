"""Freiman M-homomorphisms, GAPs, Bohr sets, almost-linear functions, super polynomials."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .field_linalg import (
    Subspace, check_modulus, grid_points, is_independent_tuple, kernel, matmul_mod, random_vector,
    solve_linear, span, vec,
)
from .gamma import normal_form_matrix
from .mideal import MIdeal, contains, graded_piece, intersection_contains, random_member
from .polyring import BudgetExceeded, PrimePoly, monomials, product_of, random_homogeneous
from .quadform import QuadForm


def N(s: int) -> int:
    """Dimension threshold N(s) = (2s + 16)(15s + 453)."""
    return (2 * s + 16) * (15 * s + 453)


# ---------------------------------------------------------------------------
# generalized arithmetic progressions

def _max_index(L: Fraction) -> int:
    """Largest integer m with m < L (L > 0)."""
    return math.ceil(L) - 1


@dataclass(frozen=True)
class GAP:
    p: int
    a: tuple
    v: tuple
    L: tuple

    def __post_init__(self):
        p = check_modulus(self.p)
        v = tuple(vec(x, p) for x in self.v)
        if not v:
            raise ValueError("a GAP needs at least one generator")
        d = len(v[0])
        if any(len(x) != d for x in v):
            raise ValueError("generators of different lengths")
        a = (0,) * d if self.a is None else vec(self.a, p)
        if len(a) != d:
            raise ValueError("base point has wrong length")
        L = tuple(Fraction(x) for x in self.L)
        if len(L) != len(v) or any(x <= 0 for x in L):
            raise ValueError("need one positive length per generator")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "L", L)

    @staticmethod
    def homogeneous(p: int, v, L) -> "GAP":
        return GAP(p, None, v, L)

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def D(self) -> int:
        return len(self.v)

    @property
    def is_homogeneous(self) -> bool:
        return not any(self.a)

    def bounds(self) -> tuple:
        return tuple(_max_index(x) for x in self.L)

    def indices(self):
        return itertools.product(*[range(-m, m + 1) for m in self.bounds()])

    def index_count(self) -> int:
        return math.prod(2 * m + 1 for m in self.bounds())

    def point(self, ell) -> tuple:
        p = self.p
        out = list(self.a)
        for l, g in zip(ell, self.v):
            for j in range(self.d):
                out[j] = (out[j] + l * g[j]) % p
        return tuple(out)

    def index_array(self) -> np.ndarray:
        ranges = [np.arange(-m, m + 1) for m in self.bounds()]
        grids = np.meshgrid(*ranges, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)

    def points_array(self) -> np.ndarray:
        idx = self.index_array()
        V = np.array(self.v, dtype=np.int64)
        return (matmul_mod(idx % self.p, V, self.p) + np.array(self.a, dtype=np.int64)) % self.p

    def elements(self) -> list:
        return [tuple(int(x) for x in r) for r in self.points_array()]

    def element_set(self) -> set:
        return set(self.elements())

    def size(self) -> int:
        return len(self.element_set())

    def is_proper(self, order: int = 1) -> bool:
        """All sums with |l_i| <= order * max index are distinct (order 1: ordinary properness)."""
        bounds = [order * m for m in self.bounds()]
        if math.prod(2 * b + 1 for b in bounds) > self.p ** self.d:
            return False
        big = GAP(self.p, self.a, self.v, tuple(Fraction(b + 1) for b in bounds))
        pts = big.points_array()
        return len(np.unique(pts, axis=0)) == len(pts)

    def index_of(self) -> dict:
        if not self.is_proper():
            raise ValueError("index map needs a proper GAP")
        return {self.point(ell): ell for ell in self.indices()}

    def scale(self, c) -> "GAP":
        c = Fraction(c)
        if not 0 < c:
            raise ValueError("scale factor must be positive")
        return GAP(self.p, self.a, self.v, tuple(c * x for x in self.L))

    def to_json(self):
        return {"p": self.p, "a": list(self.a), "v": [list(x) for x in self.v], "L": [str(x) for x in self.L]}

    @staticmethod
    def from_json(obj) -> "GAP":
        return GAP(obj["p"], tuple(obj.get("a") or ()) or None, tuple(tuple(x) for x in obj["v"]),
                   tuple(Fraction(x) for x in obj["L"]))


def scale_gap(P: GAP, c) -> GAP:
    return P.scale(c)


def crescale_check(P: GAP, c) -> dict:
    """|P(c)| >= (c/(c+2))^D |P|, exactly."""
    c = Fraction(c)
    big, small = P.size(), P.scale(c).size()
    bound = (c / (c + 2)) ** P.D * big
    return {"size": big, "scaled_size": small, "bound": bound, "holds": small >= bound}


def containment_check(P: GAP, c1, c2) -> bool:
    """P(c1) + P(c2) is inside P(c1 + c2)."""
    A = P.scale(c1).points_array()
    B = P.scale(c2).points_array()
    target = P.scale(Fraction(c1) + Fraction(c2)).element_set()
    base = np.array(P.a, dtype=np.int64)
    sums = (A[:, None, :] + B[None, :, :] - base) % P.p
    return all(tuple(int(x) for x in r) in target for r in sums.reshape(-1, P.d))


def random_gap(rng, p: int, d: int, D: int, max_size: int = 2000, proper_order: int = 2,
               homogeneous: bool = True, tries: int = 200) -> GAP:
    for _ in range(tries):
        v = [random_vector(rng, p, d, nonzero=True) for _ in range(D)]
        L = []
        room = max_size
        for i in range(D):
            share = max(1, int(round(room ** (1 / (D - i)))))
            m = int(rng.integers(0, max(1, (share - 1) // 2) + 1))
            L.append(Fraction(m + 1))
            room = max(1, room // (2 * m + 1))
        a = None if homogeneous else random_vector(rng, p, d)
        P = GAP(p, a, tuple(v), tuple(L))
        if P.index_count() <= max_size and P.is_proper(proper_order):
            return P
    raise RuntimeError("no proper GAP found; widen p or shrink max_size")


# ---------------------------------------------------------------------------
# Bohr sets and additive quadruples

def _norm_lt(r: np.ndarray, rho: Fraction, p: int) -> np.ndarray:
    """||r/p||_T < rho, exactly: min(r, p - r) < rho p."""
    m = np.minimum(r, p - r)
    return m * rho.denominator < rho.numerator * p


@dataclass
class BohrSet:
    S: tuple
    rho: Fraction
    p: int
    d: int
    points: np.ndarray

    @property
    def size(self) -> int:
        return len(self.points)

    def lower_bound(self) -> Fraction:
        return self.rho ** len(self.S) * self.p ** self.d

    def size_bound_holds(self) -> bool:
        return self.size >= self.lower_bound()

    def contains(self, h) -> bool:
        h = np.array(vec(h, self.p), dtype=np.int64)
        return all(bool(_norm_lt(np.array([int(np.dot(a, h)) % self.p]), self.rho, self.p)[0])
                   for a in np.array(self.S, dtype=np.int64).reshape(-1, self.d))

    def to_json(self):
        return {"S": [list(a) for a in self.S], "rho": str(self.rho), "p": self.p, "d": self.d,
                "size": self.size}


def bohr_mask(S, rho, p: int, pts: np.ndarray) -> np.ndarray:
    rho = Fraction(rho)
    ok = np.ones(len(pts), dtype=bool)
    for a in S:
        r = matmul_mod(pts, np.array(a, dtype=np.int64).reshape(-1, 1), p)[:, 0]
        ok &= _norm_lt(r, rho, p)
    return ok


def bohr_set(S, rho, p: int, d: int, budget: int = 10 ** 7) -> BohrSet:
    rho = Fraction(rho)
    if not 0 < rho < Fraction(1, 2):
        raise ValueError("radius must lie in (0, 1/2)")
    if p ** d > budget:
        raise BudgetExceeded(p ** d, budget)
    S = tuple(vec(a, p) for a in S)
    pts = grid_points(p, d)
    return BohrSet(S, rho, p, d, pts[bohr_mask(S, rho, p, pts)])


def _encode(pts: np.ndarray, p: int) -> np.ndarray:
    w = p ** np.arange(pts.shape[1], dtype=np.int64)
    return (np.asarray(pts, dtype=np.int64) % p) @ w


def _pair_sum_counts(H: np.ndarray, p: int, d: int) -> np.ndarray:
    """S(x) = #{(h1, h2) in H^2 : h1 + h2 = x} as a flat array over F_p^d."""
    H = np.unique(np.asarray(H, dtype=np.int64).reshape(-1, d) % p, axis=0)
    out = np.zeros(p ** d, dtype=np.int64)
    for i in range(len(H)):
        out += np.bincount(_encode((H[i] + H) % p, p), minlength=p ** d)
    return out


def R_all(H, p: int, d: int, budget: int = 10 ** 8) -> np.ndarray:
    """|R(H, h)| for every h, as an array over the encoded points of F_p^d."""
    n = p ** d
    if n * n > budget:
        raise BudgetExceeded(n * n, budget)
    S = _pair_sum_counts(H, p, d)
    pts = grid_points(p, d)
    enc = _encode(pts, p)
    out = np.zeros(n, dtype=np.int64)
    # R(h) = sum_y S(y + h) S(y)
    for j, h in enumerate(pts):
        out[enc[j]] = int(np.dot(S[_encode((pts + h) % p, p)], S[enc]))
    return out


def count_R(H, h, p: int, d: int | None = None) -> int:
    H = np.asarray(H, dtype=np.int64)
    d = H.shape[1] if d is None else d
    S = _pair_sum_counts(H, p, d)
    pts = grid_points(p, d)
    shift = np.array(vec(h, p), dtype=np.int64)
    return int(np.dot(S[_encode((pts + shift) % p, p)], S[_encode(pts, p)]))


def count_R_naive(H, h, p: int) -> int:
    Hs = sorted(set(tuple(int(x) % p for x in r) for r in H))
    Hset = set(Hs)
    cnt = 0
    for h1, h2, h3 in itertools.product(Hs, repeat=3):
        h4 = tuple((a + b - c - e) % p for a, b, c, e in zip(h1, h2, h3, h))
        cnt += h4 in Hset
    return cnt


def _rank_Q(rows) -> int:
    """Rank over the rationals, exact."""
    M = [[Fraction(x) for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(M[0]) if M else 0
    while rank < len(M) and col < ncols:
        piv = next((i for i in range(rank, len(M)) if M[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][col] != 0:
                f = M[i][col] / M[rank][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
        col += 1
    return rank


def large_spectrum(H, p: int, d: int) -> tuple:
    """Frequencies with |1_H^(alpha)|^2 >= delta^3/2, and delta."""
    ind = np.zeros((p,) * d, dtype=float)
    for h in H:
        ind[tuple(int(x) for x in h)] = 1.0
    delta = Fraction(len(H), p ** d)
    F = np.abs(np.fft.fftn(ind) / p ** d) ** 2
    thr = float(delta) ** 3 / 2
    S = [tuple(int(x) for x in a) for a in np.argwhere(F >= thr - 1e-12)]
    return sorted(S), delta


def bohr_gap(S, p: int, d: int, budget: int = 10 ** 6) -> tuple:
    """A proper homogeneous GAP P' + Y inside B(S, 1/4).

    Y = S^perp enters with full-line generators; the P' generators are short
    vectors chosen greedily with ({alpha.v/p})_alpha independent over Q.
    Returns (GAP, number of P' generators).
    """
    quarter = Fraction(1, 4)
    rowsS = np.array(S, dtype=np.int64).reshape(-1, d)
    Y = kernel(rowsS, p) if len(S) else Subspace.full(p, d)
    Ygens = list(Y.basis)
    full = Fraction(p + 1, 2)

    def width(w):
        return max((Fraction(min(int(np.dot(a, w)) % p, p - int(np.dot(a, w)) % p), p) for a in rowsS),
                   default=Fraction(0))

    def char_vec(w):
        return [int(np.dot(a, w)) % p for a in rowsS]

    cands = []
    if p ** d <= budget:
        for w in grid_points(p, d):
            w = tuple(int(x) for x in w)
            if w in Y:
                continue
            cands.append((width(w), w))
        cands.sort()
    best = None
    for Dp in range(0, len(S) + 1):
        chosen, vecs = [], []
        for wd, w in cands:
            if len(chosen) == Dp:
                break
            if wd == 0 or wd * Dp >= quarter:
                continue
            if _rank_Q(vecs + [char_vec(w)]) == len(vecs) + 1:
                chosen.append((wd, w))
                vecs.append(char_vec(w))
        if len(chosen) < Dp:
            break
        gens = list(Ygens)
        L = [full] * len(Ygens)
        for wd, w in chosen:
            m = (quarter / Dp) / wd  # need (L-1) * wd < 1/(4 Dp)
            Lw = math.ceil(m)  # so L - 1 < m
            gens.append(w)
            L.append(Fraction(max(1, Lw)))
        if not gens:
            continue
        P = GAP.homogeneous(p, tuple(gens), tuple(L))
        if not P.is_proper():
            continue
        if best is None or P.index_count() > best[0].index_count():
            best = (P, len(chosen))
    if best is None:
        P = GAP.homogeneous(p, ((0,) * (d - 1) + (1,),), (Fraction(1),))
        return P, 0
    return best


def g324_check(H, p: int, d: int, P: GAP | None = None) -> dict:
    """Desk-scale checks of the 2H - 2H structure statement: (i), (ii), (iv) and |S|."""
    H = np.asarray(H, dtype=np.int64).reshape(-1, d)
    S, delta = large_spectrum(H, p, d)
    B = bohr_set(S, Fraction(1, 4), p, d)
    R = R_all(H, p, d)
    Rb = R[_encode(B.points, p)]
    nH = len(H)
    # delta^4 p^{3d} / 2 = |H|^4 / (2 p^d)
    ii = bool(np.all(2 * Rb * p ** d >= nH ** 4)) if len(Rb) else True
    in_2H2H = bool(np.all(Rb > 0))
    Dp = None
    if P is None:
        P, Dp = bohr_gap(S, p, d)
    Ppts = P.points_array()
    P_in_B = bool(np.all(bohr_mask(S, Fraction(1, 4), p, Ppts)))
    rowsS = np.array(S, dtype=np.int64).reshape(-1, d)
    gens = P.v if Dp is None else P.v[len(P.v) - Dp:]
    charvecs = [[int(np.dot(a, g)) % p for a in rowsS] for g in gens]
    iv = _rank_Q(charvecs) == len(charvecs) if charvecs else True
    return {
        "delta": str(delta), "S_size": len(S), "S_bound": str(2 / delta ** 2),
        "S_ok": len(S) <= 2 / delta ** 2, "B_size": B.size, "R_bound_ok": ii,
        "B_in_2H-2H": in_2H2H, "P_in_B": P_in_B, "P_proper": P.is_proper(), "P_size": P.size(),
        "P_rank": P.D, "rank_ok": P.D <= len(S) + d, "iv_independent": iv,
        "iv_generators": len(gens),
        "ok": len(S) <= 2 / delta ** 2 and ii and in_2H2H and P_in_B and iv and P.is_proper(),
    }


# ---------------------------------------------------------------------------
# almost linear functions

class NotInZp(ValueError):
    pass


@dataclass(frozen=True)
class AlmostLinearFn:
    """h -> sum_i {alpha_i . tau(h)} beta_i with alpha_i = a_i/p, beta_i = b_i/p."""

    p: int
    alphas: tuple
    betas: tuple

    def __post_init__(self):
        p = check_modulus(self.p)
        object.__setattr__(self, "alphas", tuple(vec(a, p) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(int(b) % p for b in self.betas))
        if len(self.alphas) != len(self.betas):
            raise ValueError("need one beta per alpha")

    @property
    def K(self) -> int:
        return len(self.alphas)

    def _numerator(self, h) -> int:
        p = self.p
        return sum((sum(a * x for a, x in zip(al, h)) % p) * b for al, b in zip(self.alphas, self.betas))

    def value(self, h) -> Fraction:
        """xi'(h) in (1/p)Z / Z."""
        num = self._numerator(h)
        if num % self.p:
            raise NotInZp(f"value at {tuple(h)} is not in Z/p")
        return Fraction((num // self.p) % self.p, self.p)

    def field_value(self, h) -> int:
        return int(self.value(h) * self.p) % self.p

    def lands_in_zp(self, H) -> tuple:
        for h in H:
            if self._numerator(h) % self.p:
                return False, tuple(h)
        return True, None

    def is_freiman_hom(self, H, budget: int = 10 ** 7) -> tuple:
        """Order 4: equal pair sums in H give equal value sums in Q/Z."""
        Hs = sorted(set(tuple(int(x) for x in h) for h in H))
        if len(Hs) ** 2 > budget:
            raise BudgetExceeded(len(Hs) ** 2, budget)
        vals = {h: self.value(h) for h in Hs}
        p = self.p
        seen = {}
        for i, h1 in enumerate(Hs):
            for h2 in Hs[i:]:
                key = tuple((a + b) % p for a, b in zip(h1, h2))
                v = (vals[h1] + vals[h2]) % 1
                if key not in seen:
                    seen[key] = (v, h1, h2)
                elif seen[key][0] != v:
                    _, g1, g2 = seen[key]
                    return False, (h1, h2, g1, g2)
        return True, None

    @staticmethod
    def carry_example(p: int, a) -> "AlmostLinearFn":
        """Complexity 2: xi'(h) = (r - [r > p/2]) / p with r = a.h mod p."""
        return AlmostLinearFn(p, (a, tuple(2 * x % p for x in a)), (p - 2, 1))


# ---------------------------------------------------------------------------
# super polynomials

@dataclass(frozen=True)
class SuperPoly:
    p: int
    d: int
    k: int
    s: int
    coeffs: tuple  # sorted ((multi-index), PrimePoly) with C_i in HP(s - |i|)

    @staticmethod
    def make(p, d, k, s, coeffs: dict) -> "SuperPoly":
        items = []
        for i, C in coeffs.items():
            i = tuple(int(x) for x in i)
            if len(i) != k or any(x < 0 for x in i) or sum(i) > s:
                raise ValueError(f"bad multi-index {i}")
            if not C.is_zero() and not C.is_homogeneous(s - sum(i)):
                raise ValueError(f"C_{i} must be homogeneous of degree {s - sum(i)}")
            if not C.is_zero():
                items.append((i, C))
        return SuperPoly(p, d, k, s, tuple(sorted(items, key=lambda t: t[0])))

    def coefficient(self, i) -> PrimePoly:
        return dict(self.coeffs).get(tuple(i), PrimePoly.zero(self.p, self.d))

    def degree(self) -> int:
        return max((sum(i) for i, _ in self.coeffs), default=self.s)

    def is_homogeneous(self) -> bool:
        deg = self.degree()
        return all(sum(i) == deg for i, _ in self.coeffs)

    def is_symmetric(self) -> bool:
        C = dict(self.coeffs)
        return all(C.get(tuple(i[j] for j in perm), None) == c
                   for i, c in C.items() for perm in itertools.permutations(range(self.k)))

    @staticmethod
    def random(rng, p, d, k, s, symmetric=False, homogeneous_degree=None) -> "SuperPoly":
        coeffs = {}
        for i in itertools.product(range(s + 1), repeat=k):
            if sum(i) > s:
                continue
            if homogeneous_degree is not None and sum(i) != homogeneous_degree:
                continue
            key = tuple(sorted(i)) if symmetric else i
            if key not in coeffs:
                coeffs[key] = random_homogeneous(rng, p, d, s - sum(i))
            coeffs[i] = coeffs[key]
        return SuperPoly.make(p, d, k, s, coeffs)


def super_eval(F: SuperPoly, args) -> PrimePoly:
    args = list(args)
    if len(args) != F.k:
        raise ValueError(f"super polynomial has arity {F.k}, got {len(args)} arguments")
    for f in args:
        if not f.is_zero() and not f.is_homogeneous(1):
            raise ValueError("arguments must be homogeneous linear forms")
    out = PrimePoly.zero(F.p, F.d)
    for i, C in F.coeffs:
        out = out + C * product_of([f ** e for f, e in zip(args, i) if e], F.p, F.d)
    return out


def super_at(F: SuperPoly, M: QuadForm, xs) -> PrimePoly:
    """F(L_{x_1}, ..., L_{x_k})."""
    return super_eval(F, [M.linear_form(x) for x in xs])


# ---------------------------------------------------------------------------
# Freiman M-homomorphisms

@dataclass
class FreimanReport:
    holds: bool
    mode: str
    tuples_checked: int
    counterexample: tuple | None = None
    seed: int | None = None
    order: int = 4

    def to_json(self):
        ce = None
        if self.counterexample is not None:
            ce = [[list(h) for h in side] for side in self.counterexample]
        return {"holds": self.holds, "mode": self.mode, "order": self.order,
                "tuples_checked": self.tuples_checked, "counterexample": ce, "seed": self.seed}


def _as_lookup(xi, H):
    if callable(xi):
        return {h: xi(h) for h in H}
    return {h: xi[h] for h in H}


def _xi_rows(xi, H, s):
    return np.array([xi[h].coeff_vector(s) for h in H], dtype=np.int64)


def _reduces_to_zero(M: QuadForm, pts, row, s: int) -> bool:
    W = span(list(pts), M.p, M.d)
    return not np.any(graded_piece(M, W, s).reduce(row, M.p))


def relation_check(xi, H, M: QuadForm, bad, n: int = 2, s: int | None = None, budget: int = 10 ** 7,
                   samples: int = 2000, seed: int | None = None) -> FreimanReport:
    """Run bad(left, right, omega) over additive relations of order 2^n in H.

    Exhaustive over pairs of half-size multisets with equal sums when the
    multiset count fits the budget, otherwise seeded sampling of the left half
    and all but one of the right half.
    """
    p, d = M.p, M.d
    H = sorted(set(tuple(int(x) % p for x in h) for h in H))
    look = _as_lookup(xi, H)
    if s is None:
        s = max([f.degree() for f in look.values()] + [0])
    X = _xi_rows(look, H, s).reshape(len(H), -1)
    Pts = np.array(H, dtype=np.int64).reshape(-1, d)
    half = 2 ** (n - 1)
    order = 2 ** n
    nH = len(H)
    if nH == 0:
        return FreimanReport(True, "exhaustive", 0, None, None, order)
    if math.comb(nH + half - 1, half) <= budget:
        if half == 1:
            idx = np.arange(nH).reshape(-1, 1)
        elif half == 2:
            i, j = np.triu_indices(nH)
            idx = np.stack([i, j], axis=1)
        else:
            idx = np.array(list(itertools.combinations_with_replacement(range(nH), half)), dtype=np.int64)
        key = _encode(Pts[idx].sum(axis=1) % p, p)
        perm = np.argsort(key, kind="stable")
        cuts = np.flatnonzero(np.diff(key[perm])) + 1
        checked = 0
        for grp in np.split(perm, cuts):
            g = len(grp)
            checked += g * g
            if g == 1:
                continue
            rows = X[idx[grp]].sum(axis=1) % p
            if np.all(rows == rows[0]):
                continue
            for a, b in itertools.combinations(range(g), 2):
                omega = (rows[a] - rows[b]) % p
                if not np.any(omega):
                    continue
                left = tuple(H[t] for t in idx[grp[a]])
                right = tuple(H[t] for t in idx[grp[b]])
                if bad(left, right, omega):
                    return FreimanReport(False, "exhaustive", checked, (left, right), None, order)
        return FreimanReport(True, "exhaustive", checked, None, None, order)
    seed = 0 if seed is None else seed
    rng = np.random.default_rng(seed)
    where = {h: t for t, h in enumerate(H)}
    checked = 0
    for _ in range(samples):
        li = rng.integers(0, nH, size=half)
        ri = list(rng.integers(0, nH, size=half - 1))
        last = tuple(int(x) for x in (Pts[li].sum(axis=0) - Pts[ri].sum(axis=0)) % p)
        if last not in where:
            continue
        ri.append(where[last])
        checked += 1
        omega = (X[li].sum(axis=0) - X[ri].sum(axis=0)) % p
        if np.any(omega):
            left = tuple(H[t] for t in li)
            right = tuple(H[t] for t in ri)
            if bad(left, right, omega):
                return FreimanReport(False, "sampled", checked, (left, right), seed, order)
    return FreimanReport(True, "sampled", checked, None, seed, order)


def is_freiman_hom(xi, H, M: QuadForm, n: int = 2, s: int | None = None, budget: int = 10 ** 7,
                   samples: int = 2000, seed: int | None = None) -> FreimanReport:
    """Order 2^n: the xi-sums of the two halves agree modulo J^M of the span of all points."""
    if s is None:
        look = _as_lookup(xi, [tuple(h) for h in H])
        s = max([f.degree() for f in look.values()] + [0])

    def bad(left, right, omega):
        return not _reduces_to_zero(M, left + right, omega, s)

    return relation_check(xi, H, M, bad, n, s, budget, samples, seed)


def freiman4_naive(xi, H, M: QuadForm) -> tuple:
    """Quadruple loop with polynomial membership; oracle for small H."""
    p = M.p
    H = sorted(set(tuple(int(x) % p for x in h) for h in H))
    look = _as_lookup(xi, H)
    Hset = set(H)
    for h1, h2, h3 in itertools.product(H, repeat=3):
        h4 = tuple((a + b - c) % p for a, b, c in zip(h1, h2, h3))
        if h4 not in Hset:
            continue
        f = look[h1] + look[h2] - look[h3] - look[h4]
        if not contains(MIdeal.of(M, [h1, h2, h3]), f):
            return False, (h1, h2, h3, h4)
    return True, None


# ---------------------------------------------------------------------------
# locally linear maps

def locally_linear(P: GAP, fs) -> dict:
    """h = sum l_i v_i  ->  f_0 + sum l_i f_i."""
    out = {}
    for ell in P.indices():
        f = fs[0]
        for l, g in zip(ell, fs[1:]):
            if l:
                f = f + g.scale(l % P.p)
        out[P.point(ell)] = f
    return out


def random_locally_linear(rng, P: GAP, M: QuadForm, s: int, noise: bool = True, f0_in_JM: bool = False):
    """(xi, fs): a locally linear T plus, optionally, a random member of J^M_h at each h."""
    p, d = M.p, M.d
    fs = [random_homogeneous(rng, p, d, s) for _ in range(P.D + 1)]
    if f0_in_JM:
        fs[0] = random_member(MIdeal(M, Subspace.trivial(p, d)), s, rng)
    T = locally_linear(P, fs)
    if noise:
        T = {h: f + random_member(MIdeal.of(M, [h]), s, rng) for h, f in T.items()}
    return T, fs


@dataclass
class FitResult:
    feasible: bool
    coeffs: list | None
    witness: tuple | None = None
    witness_certified: bool = False
    residual_failures: int = 0


def _line_key(h, p):
    """Canonical generator of span{h}."""
    for x in h:
        if x:
            inv = pow(x, -1, p)
            return tuple(y * inv % p for y in h)
    return tuple(h)


def fit_locally_linear(xi, P: GAP, M: QuadForm, s: int | None = None, find_witness: bool = True) -> FitResult:
    """Find f_0..f_D with xi(h) - (f_0 + sum l_i f_i) in J^M_h for all h in P."""
    if not P.is_homogeneous:
        raise ValueError("locally linear maps live on homogeneous GAPs")
    if not P.is_proper():
        raise ValueError("GAP is not proper")
    p, d = M.p, M.d
    idx = list(P.indices())
    pts = [P.point(ell) for ell in idx]
    look = _as_lookup(xi, pts)
    if s is None:
        s = max(0, max(f.degree() for f in look.values()))
    S = len(monomials(d, s))
    D = P.D
    Tcache = {}
    blocks = []
    for ell, h in zip(idx, pts):
        key = _line_key(h, p)
        if key not in Tcache:
            Tcache[key] = normal_form_matrix(M, span([h], p, d), s)
        T = Tcache[key]
        Tt = T.T % p
        A = np.hstack([Tt] + [(l % p) * Tt % p for l in ell])
        b = matmul_mod(look[h].coeff_vector(s).reshape(1, -1), T, p)[0]
        blocks.append((A, b))

    def solve(keep):
        if not keep:
            return solve_linear(np.zeros((0, (D + 1) * S), dtype=np.int64), np.zeros(0, dtype=np.int64), p)
        A = np.vstack([blocks[i][0] for i in keep])
        b = np.concatenate([blocks[i][1] for i in keep])
        return solve_linear(A, b, p)

    n = len(blocks)
    sol = solve(list(range(n)))
    if sol is not None:
        x = np.array(sol.x, dtype=np.int64) if len(sol.x) else np.zeros((D + 1) * S, dtype=np.int64)
        fs = [PrimePoly.from_coeff_vector(x[j * S:(j + 1) * S], p, d, s) for j in range(D + 1)]
        T = locally_linear(P, fs)
        fails = sum(1 for h in pts if not contains(MIdeal.of(M, [h]), look[h] - T[h]))
        return FitResult(True, fs, None, False, fails)
    if not find_witness:
        return FitResult(False, None)
    # an index whose removal restores feasibility lies in every infeasible prefix and suffix
    lo, hi = 0, n - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if solve(list(range(mid + 1))) is None:
            hi = mid
        else:
            lo = mid + 1
    k = lo
    lo, hi = 0, n - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if solve(list(range(mid, n))) is None:
            lo = mid
        else:
            hi = mid - 1
    j = lo
    for c in range(min(j, k), max(j, k) + 1):
        if solve([i for i in range(n) if i != c]) is not None:
            return FitResult(False, None, pts[c], True)
    return FitResult(False, None, pts[k], False)


# ---------------------------------------------------------------------------
# cocycle statements: forward constructions and tiny inverse solves

@dataclass
class CocycleReport:
    lemma: str
    mode: str
    checks: int
    failures: int
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.failures == 0) == self.details.get("expect_ok", True)

    def to_json(self):
        return {"lemma": self.lemma, "mode": self.mode, "checks": self.checks, "failures": self.failures,
                **self.details}


def _independent(p, d, vs, U=None) -> bool:
    return is_independent_tuple([tuple(v) for v in vs], p, d, modulo=U)


def _sample_points(rng, p, d, n):
    return [random_vector(rng, p, d, nonzero=True) for _ in range(n)]


def _J(M, vs, V=None):
    W = span(list(vs), M.p, M.d)
    return MIdeal(M, W if V is None else W + V)


def cocycle_coco01(M, s, rng, n_points=12, V=None):
    """F(x) = G + (member of J_{x+V}) satisfies F(x) = F(y) mod J_{x,y,V}."""
    p, d = M.p, M.d
    V = Subspace.trivial(p, d) if V is None else V
    G = random_homogeneous(rng, p, d, s)
    xs = _sample_points(rng, p, d, n_points)
    F = {x: G + random_member(MIdeal(M, span([x], p, d) + V), s, rng) for x in xs}
    checks = fails = 0
    for x, y in itertools.combinations(xs, 2):
        if not _independent(p, d, [x, y], V):
            continue
        checks += 1
        fails += not contains(_J(M, [x, y], V), F[x] - F[y])
    return CocycleReport("coco1" if V.dim else "coco01", "forward", checks, fails, {"s": s, "dimV": V.dim})


def cocycle_coco1c(M, s, rng, n_points=10, V=None):
    p, d = M.p, M.d
    V = Subspace.trivial(p, d) if V is None else V
    G = random_homogeneous(rng, p, d, s)
    xs = _sample_points(rng, p, d, n_points)
    F = {x: G + random_member(MIdeal(M, span([x], p, d) + V), s, rng) for x in xs}
    F2 = {x: G + random_member(MIdeal(M, span([x], p, d) + V), s, rng) for x in xs}
    checks = fails = 0
    for x, y in itertools.permutations(xs, 2):
        if not _independent(p, d, [x, y], V):
            continue
        checks += 1
        fails += not contains(_J(M, [x, y], V), F[x] - F2[y])
    return CocycleReport("coco1c", "forward", checks, fails, {"s": s})


def coco01_inverse(M, s, F: dict):
    """Solve for G with F(x) - G in J^M_x for all sampled x; check the hypothesis first."""
    p, d = M.p, M.d
    xs = list(F)
    hyp = all(contains(_J(M, [x, y]), F[x] - F[y]) for x, y in itertools.combinations(xs, 2)
              if _independent(p, d, [x, y]))
    rows, rhs = [], []
    for x in xs:
        T = normal_form_matrix(M, span([x], p, d), s)
        rows.append(T.T % p)
        rhs.append(matmul_mod(F[x].coeff_vector(s).reshape(1, -1), T, p)[0])
    sol = solve_linear(np.vstack(rows), np.concatenate(rhs), p)
    G = None
    if sol is not None:
        x = np.array(sol.x, dtype=np.int64) if len(sol.x) else np.zeros(len(monomials(d, s)), dtype=np.int64)
        G = PrimePoly.from_coeff_vector(x, p, d, s)
    return {"hypothesis": hyp, "solved": G is not None, "G": G,
            "consistent": (not hyp) or G is not None}


def cocycle_cocon1(M, s, rng, n_points=10):
    """F(x) = G(L_x) + (member of J^M) satisfies F(x) = F(y) mod J_{x-y}."""
    p, d = M.p, M.d
    G = SuperPoly.random(rng, p, d, 1, s)
    JM = MIdeal(M, Subspace.trivial(p, d))
    xs = _sample_points(rng, p, d, n_points)
    F = {x: super_at(G, M, [x]) + random_member(JM, s, rng) for x in xs}
    checks = fails = 0
    for x, y in itertools.combinations(xs, 2):
        if not _independent(p, d, [x, y]):
            continue
        checks += 1
        diff = tuple((a - b) % p for a, b in zip(x, y))
        fails += not contains(_J(M, [diff]), F[x] - F[y])
    return CocycleReport("cocon1", "forward", checks, fails, {"s": s})


def cocon1_inverse(M, s, F: dict):
    """Solve for C_0..C_s with F(x) - sum_j C_j L_x^j in J^M for all sampled x."""
    p, d = M.p, M.d
    S = len(monomials(d, s))
    T = normal_form_matrix(M, Subspace.trivial(p, d), s)
    cols = []
    for j in range(s + 1):
        for mono in monomials(d, s - j):
            cols.append((j, mono))
    rows, rhs = [], []
    for x in F:
        Lx = M.linear_form(x)
        A = np.zeros((S, len(cols)), dtype=np.int64)
        for c, (j, mono) in enumerate(cols):
            g = PrimePoly.monomial(mono, 1, p, d) * (Lx ** j)
            A[:, c] = matmul_mod(g.coeff_vector(s).reshape(1, -1), T, p)[0]
        rows.append(A)
        rhs.append(matmul_mod(F[x].coeff_vector(s).reshape(1, -1), T, p)[0])
    sol = solve_linear(np.vstack(rows), np.concatenate(rhs), p)
    return {"solved": sol is not None}


def cocycle_cocozero(M, s, rng, k=1, n_points=10, break_one=False):
    """All C_i in J^M gives F(L_x) in J^M; one C_i outside J^M gives a witness x."""
    p, d = M.p, M.d
    JM = MIdeal(M, Subspace.trivial(p, d))
    coeffs = {}
    for i in itertools.product(range(s + 1), repeat=k):
        if sum(i) <= s:
            coeffs[i] = random_member(JM, s - sum(i), rng) if s - sum(i) >= 2 else PrimePoly.zero(p, d)
    broken = None
    if break_one:
        choices = [i for i in coeffs]
        broken = choices[int(rng.integers(0, len(choices)))]
        g = None
        while g is None or contains(JM, g):
            g = random_homogeneous(rng, p, d, s - sum(broken))
        coeffs[broken] = g
    F = SuperPoly.make(p, d, k, s, coeffs)
    checks = fails = 0
    witness = None
    for _ in range(n_points):
        xs = _sample_points(rng, p, d, k)
        if not _independent(p, d, xs):
            continue
        checks += 1
        if not contains(JM, super_at(F, M, xs)):
            fails += 1
            witness = witness or xs
    det = {"s": s, "k": k, "broken": list(broken) if broken else None,
           "witness": [list(x) for x in witness] if witness else None, "expect_ok": not break_one}
    return CocycleReport("cocozero", "inverse" if break_one else "forward", checks, fails, det)


def cocycle_cocoprr(M, s, rng, n_points=8):
    """G_x(f) := Q(L_x, f) + noise in J^M with Q symmetric gives G_x(L_y) = G_y(L_x) mod J^M."""
    p, d = M.p, M.d
    Q = SuperPoly.random(rng, p, d, 2, s, symmetric=True)
    JM = MIdeal(M, Subspace.trivial(p, d))
    xs = _sample_points(rng, p, d, n_points)
    Gx = {}
    for x in xs:
        Lx = M.linear_form(x)
        cj = {}
        for j in range(s + 1):
            c = PrimePoly.zero(p, d)
            for i in range(s + 1 - j):
                c = c + Q.coefficient((i, j)) * (Lx ** i)
            cj[(j,)] = c + random_member(JM, s - j, rng)
        Gx[x] = SuperPoly.make(p, d, 1, s, cj)
    checks = fails = 0
    for x, y in itertools.combinations(xs, 2):
        if not _independent(p, d, [x, y]):
            continue
        checks += 1
        fails += not contains(JM, super_at(Gx[x], M, [y]) - super_at(Gx[y], M, [x]))
        fails += not contains(JM, super_at(Gx[x], M, [y]) - super_at(Q, M, [x, y]))
    return CocycleReport("cocoprr", "forward", checks, fails, {"s": s})


def cocycle_coco4(M, s, rng, n_points=7):
    """C(x, y) = phi(x) - phi(y) + (member of J_{x-y}) satisfies the triangle congruence."""
    p, d = M.p, M.d
    xs = _sample_points(rng, p, d, n_points)
    phi = {x: random_homogeneous(rng, p, d, s) for x in xs}
    C = {}
    for x, y in itertools.permutations(xs, 2):
        diff = tuple((a - b) % p for a, b in zip(x, y))
        C[(x, y)] = phi[x] - phi[y] + random_member(_J(M, [diff]), s, rng)
    checks = fails = 0
    for x, y, z in itertools.permutations(xs, 3):
        if not _independent(p, d, [x, y, z]):
            continue
        checks += 1
        dxy = tuple((a - b) % p for a, b in zip(x, y))
        dyz = tuple((a - b) % p for a, b in zip(y, z))
        fails += not contains(_J(M, [dxy, dyz]), C[(x, y)] + C[(y, z)] - C[(x, z)])
    return CocycleReport("coco4", "forward", checks, fails, {"s": s})


def cocycle_cocon2(M, s, rng, P: GAP):
    """F(x) = L_x^2 G(L_x) + T(x) + (member of J^M), T locally linear with f_0 in J^M,
    satisfies F(x) + F(y) = F(x + y) mod J_x cap J_y on independent x, y in P(1/2)."""
    p, d = M.p, M.d
    JM = MIdeal(M, Subspace.trivial(p, d))
    G = SuperPoly.random(rng, p, d, 1, max(s - 2, 0)) if s >= 2 else None
    T, _ = random_locally_linear(rng, P, M, s, noise=False, f0_in_JM=True)

    def F(x):
        out = T[x] + random_member(JM, s, rng)
        if G is not None:
            Lx = M.linear_form(x)
            out = out + Lx * Lx * super_at(G, M, [x])
        return out

    Fv = {x: F(x) for x in T}
    half = P.scale(Fraction(1, 2)).elements()
    checks = fails = 0
    for x, y in itertools.combinations(half, 2):
        if not _independent(p, d, [x, y]):
            continue
        z = tuple((a + b) % p for a, b in zip(x, y))
        if z not in Fv:
            continue
        checks += 1
        f = Fv[x] + Fv[y] - Fv[z]
        fails += not intersection_contains(M, [span([x], p, d), span([y], p, d)], f)
    return CocycleReport("cocon2", "forward", checks, fails, {"s": s, "pairs": checks})


def gsol_forward(M, s, rng, P: GAP) -> CocycleReport:
    """T locally linear plus members of J_h: order-4 Freiman property and a successful fit."""
    xi, fs = random_locally_linear(rng, P, M, s, noise=True)
    rep = is_freiman_hom(xi, list(xi), M, n=2, s=s)
    fit = fit_locally_linear(xi, P, M, s)
    fails = (not rep.holds) + (not fit.feasible) + fit.residual_failures
    return CocycleReport("gsol", "forward", rep.tuples_checked, fails,
                         {"freiman": rep.holds, "fit": fit.feasible, "residual_failures": fit.residual_failures})


COCYCLE_LEMMAS = {
    "coco01": cocycle_coco01,
    "coco1": lambda M, s, rng, **kw: cocycle_coco01(M, s, rng, V=span([random_vector(rng, M.p, M.d, True)],
                                                                       M.p, M.d), **kw),
    "coco1c": cocycle_coco1c,
    "cocon1": cocycle_cocon1,
    "cocozero": cocycle_cocozero,
    "cocoprr": cocycle_cocoprr,
    "coco02": cocycle_coco4,
    "coco4": cocycle_coco4,
}


def verify_cocycle_lemmas(which: str, M: QuadForm, s: int, rng, **kw) -> CocycleReport:
    if which == "cocon2":
        return cocycle_cocon2(M, s, rng, kw["P"])
    if which == "gsol":
        return gsol_forward(M, s, rng, kw["P"])
    if which not in COCYCLE_LEMMAS:
        raise KeyError(f"unknown cocycle lemma {which!r}")
    return COCYCLE_LEMMAS[which](M, s, rng, **kw)
