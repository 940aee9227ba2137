"""Quadratic forms M(n) = (nA).n + n.u + v over F_p^d and exact point counts."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .field_linalg import (
    Subspace, check_modulus, dot, grid_points, kernel, matmul_mod, rank as mat_rank,
    span, vec, is_independent_tuple, random_vector,
)
from .polyring import BudgetExceeded, PrimePoly


@dataclass(frozen=True)
class QuadForm:
    p: int
    A: tuple
    u: tuple | None = None
    v: int = 0

    def __post_init__(self):
        p = check_modulus(self.p)
        A = tuple(tuple(int(x) % p for x in row) for row in self.A)
        d = len(A)
        if d < 1 or any(len(r) != d for r in A):
            raise ValueError("A must be a square matrix")
        if any(A[i][j] != A[j][i] for i in range(d) for j in range(d)):
            raise ValueError("A must be symmetric")
        u = (0,) * d if self.u is None else vec(self.u, p)
        if len(u) != d:
            raise ValueError("u has wrong length")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", int(self.v) % p)

    @property
    def d(self) -> int:
        return len(self.A)

    @staticmethod
    def sum_of_squares(p: int, d: int) -> "QuadForm":
        return QuadForm(p, tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d)))

    @staticmethod
    def diagonal(p: int, diag) -> "QuadForm":
        d = len(diag)
        return QuadForm(p, tuple(tuple(diag[i] if i == j else 0 for j in range(d)) for i in range(d)))

    @staticmethod
    def random_nondegenerate(rng, p: int, d: int) -> "QuadForm":
        while True:
            B = rng.integers(0, p, size=(d, d))
            A = (B + B.T) % p
            M = QuadForm(p, tuple(map(tuple, A.tolist())))
            if M.is_nondegenerate():
                return M

    def matrix(self) -> np.ndarray:
        return np.array(self.A, dtype=np.int64)

    @property
    def is_pure(self) -> bool:
        return not any(self.u)

    @property
    def is_homogeneous(self) -> bool:
        return self.is_pure and self.v == 0

    def is_nondegenerate(self) -> bool:
        return mat_rank(self.matrix(), self.p) == self.d

    def __call__(self, n) -> int:
        return self.evaluate(n)

    def evaluate(self, n) -> int:
        p = self.p
        nA = [sum(n[i] * self.A[i][j] for i in range(self.d)) for j in range(self.d)]
        return (dot(nA, n, p) + dot(n, self.u, p) + self.v) % p

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.int64) % self.p
        nA = matmul_mod(pts, self.matrix(), self.p)
        q = np.sum((nA * pts) % self.p, axis=1) % self.p
        if self.is_pure:
            return (q + self.v) % self.p
        lin = matmul_mod(pts, np.array(self.u, dtype=np.int64).reshape(-1, 1), self.p)[:, 0]
        return (q + lin + self.v) % self.p

    def bilinear(self, x, y) -> int:
        """(xA).y"""
        return dot(self.hA(x), y, self.p)

    def hA(self, h) -> tuple:
        return tuple(sum(h[i] * self.A[i][j] for i in range(self.d)) % self.p for j in range(self.d))

    def as_poly(self) -> PrimePoly:
        d, p = self.d, self.p
        coeffs = {}
        for i in range(d):
            for j in range(d):
                e = [0] * d
                e[i] += 1
                e[j] += 1
                coeffs[tuple(e)] = coeffs.get(tuple(e), 0) + self.A[i][j]
        for i in range(d):
            e = [0] * d
            e[i] = 1
            coeffs[tuple(e)] = coeffs.get(tuple(e), 0) + self.u[i]
        coeffs[(0,) * d] = self.v
        return PrimePoly.from_dict(coeffs, p, d)

    def quadratic_part(self) -> PrimePoly:
        return QuadForm(self.p, self.A).as_poly()

    def linear_form(self, h) -> PrimePoly:
        """The ideal generator n -> (hA).n."""
        return PrimePoly.linear(self.hA(h), self.p, self.d)

    def difference_form(self, h) -> PrimePoly:
        """n -> M(n+h) - M(n) = 2(hA).n + (hA).h + h.u."""
        p = self.p
        lin = PrimePoly.linear([(2 * c) % p for c in self.hA(h)], p, self.d)
        const = (self.bilinear(h, h) + dot(h, self.u, p)) % p
        return lin + const

    def shifted(self, h) -> "QuadForm":
        """n -> M(n+h)."""
        p = self.p
        hA = self.hA(h)
        u = tuple((self.u[j] + 2 * hA[j]) % p for j in range(self.d))
        return QuadForm(p, self.A, u, self.evaluate(h))

    def to_json(self):
        return {"p": self.p, "d": self.d, "A": [list(r) for r in self.A], "u": list(self.u), "v": self.v}

    @staticmethod
    def from_json(obj) -> "QuadForm":
        M = QuadForm(obj["p"], tuple(tuple(r) for r in obj["A"]), tuple(obj.get("u") or ()) or None, obj.get("v", 0))
        if M.d != obj.get("d", M.d):
            raise ValueError("d does not match A")
        return M


def rank(M: QuadForm) -> int:
    return mat_rank(M.matrix(), M.p)


def perp(M: QuadForm, V: Subspace) -> Subspace:
    """V^{perp_M} = {n : (mA).n = 0 for all m in V}."""
    if V.is_trivial():
        return Subspace.full(M.p, M.d)
    return kernel(matmul_mod(V.matrix(), M.matrix(), M.p), M.p)


def gram(M: QuadForm, V: Subspace) -> np.ndarray:
    B = V.matrix()
    return matmul_mod(matmul_mod(B, M.matrix(), M.p), B.T, M.p)


def restricted_rank(M: QuadForm, V: Subspace, c=None) -> int:
    """Rank of the quadratic part of t -> M(t.B + c) for a basis B of V.

    The shift c only changes linear and constant terms, so it does not enter.
    """
    if V.is_trivial():
        return 0
    return mat_rank(gram(M, V), M.p)


def isotropic_dim(M: QuadForm, V: Subspace) -> int:
    return V.intersect(perp(M, V)).dim


def is_isotropic(M: QuadForm, V: Subspace) -> bool:
    return isotropic_dim(M, V) > 0


@dataclass
class CountReport:
    count: int
    main_term: int
    deviation: Fraction
    codim: int
    rank: int
    points: int
    dependent: bool = False
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "count": self.count, "main_term": self.main_term,
            "normalized_deviation": str(self.deviation), "codim": self.codim,
            "rank": self.rank, "points": self.points, "dependent": self.dependent, **self.extra,
        }


def _iter_chunks(V: Subspace, c, chunk=1 << 18):
    """Points of V + c in fixed lexicographic order, chunked."""
    p, k = V.p, V.dim
    if k == 0:
        yield np.array([vec(c, p)], dtype=np.int64)
        return
    B = V.matrix()
    off = np.array(vec(c, p), dtype=np.int64)
    inner = 0
    while inner < k and p ** (inner + 1) <= chunk:
        inner += 1
    inner = max(inner, 1)
    tail = grid_points(p, inner)
    tail_pts = matmul_mod(tail, B[k - inner:], p)
    for head in itertools.product(range(p), repeat=k - inner):
        base = off.copy()
        for a, row in zip(head, B[: k - inner]):
            base = (base + a * row) % p
        yield (tail_pts + base) % p


def count_variety_affine(M: QuadForm, V: Subspace, c=None, budget: int = 10 ** 8) -> CountReport:
    """|V(M) ∩ (V + c)| by enumeration, with main term p^{dim V - 1}."""
    c = (0,) * M.d if c is None else c
    if V.size() > budget:
        raise BudgetExceeded(V.size(), budget)
    count = 0
    for pts in _iter_chunks(V, c):
        count += int(np.count_nonzero(M.eval_many(pts) == 0))
    main = M.p ** (V.dim - 1) if V.dim >= 1 else 1
    return CountReport(count, main, Fraction(count - main, main), M.d - V.dim,
                       restricted_rank(M, V, c), V.size())


def common_variety_mask(M: QuadForm, hs, pts: np.ndarray) -> np.ndarray:
    ok = M.eval_many(pts) == 0
    for h in hs:
        ok &= M.eval_many((pts + np.asarray(h, dtype=np.int64)) % M.p) == 0
    return ok


def count_common_variety(M: QuadForm, hs, budget: int = 10 ** 8) -> CountReport:
    """|V(M)^{h_1..h_r}| = #{n : M(n) = 0 and M(n + h_i) = 0 for all i}."""
    p, d = M.p, M.d
    hs = [vec(h, p) for h in hs]
    r = len(hs)
    dependent = not is_independent_tuple(hs, p, d) if hs else False
    if dependent:
        warnings.warn("shift vectors are linearly dependent; the counting estimate does not apply")
    if p ** d > budget:
        raise BudgetExceeded(p ** d, budget)
    count = 0
    for pts in _iter_chunks(Subspace.full(p, d), (0,) * d):
        count += int(np.count_nonzero(common_variety_mask(M, hs, pts)))
    main = p ** (d - r - 1)
    rep = CountReport(count, main, Fraction(count - main, main), r, rank(M), p ** d, dependent)
    rep.extra["estimate_applies"] = (d - 2 * r >= 3) and not dependent and M.is_nondegenerate()
    return rep


def common_variety_points(M: QuadForm, hs, budget: int = 10 ** 8) -> np.ndarray:
    p, d = M.p, M.d
    if p ** d > budget:
        raise BudgetExceeded(p ** d, budget)
    out = [pts[common_variety_mask(M, hs, pts)] for pts in _iter_chunks(Subspace.full(p, d), (0,) * d)]
    return np.vstack(out)


def cone_points(M: QuadForm, V: Subspace, budget: int = 10 ** 8) -> np.ndarray:
    """Common zeros of the linear-form ideal: {n in V^perp : M(n) = 0}."""
    W = perp(M, V)
    if W.size() > budget:
        raise BudgetExceeded(W.size(), budget)
    out = [pts[M.eval_many(pts) == 0] for pts in _iter_chunks(W, (0,) * M.d)]
    return np.vstack(out)


def is_isotropic_tuple(M: QuadForm, hs) -> bool:
    V = span(hs, M.p, M.d)
    return V.is_trivial() or is_isotropic(M, V) or any(not any(h) for h in hs)


def isotropic_tuple_fraction(M: QuadForm, k: int, sample: int = 2000, rng=None,
                             budget: int = 10 ** 6) -> tuple:
    """Fraction of k-tuples whose span is M-isotropic.

    Returns (fraction, exact) where exact mode enumerates all p^{kd} tuples.
    Tuples containing the zero vector count as isotropic (zero lies in every perp).
    """
    p, d = M.p, M.d
    total = p ** (k * d)
    if total <= budget:
        pts = [tuple(int(x) for x in r) for r in grid_points(p, d)]
        hits = sum(1 for tup in itertools.product(pts, repeat=k) if is_isotropic_tuple(M, tup))
        return Fraction(hits, total), True
    if rng is None:
        rng = np.random.default_rng(0)
    hits = 0
    for _ in range(sample):
        tup = [random_vector(rng, p, d) for _ in range(k)]
        hits += is_isotropic_tuple(M, tup)
    return Fraction(hits, sample), False
