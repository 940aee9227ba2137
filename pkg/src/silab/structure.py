"""Structure-obstacle pairs and decompositions, separation maps, subset extraction."""
from __future__ import annotations

import itertools
from fractions import Fraction
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .field_linalg import (
    Subspace, is_independent_tuple, matmul_mod, random_independent, solve_linear, span,
)
from .freiman import FreimanReport, is_freiman_hom, relation_check
from .mideal import MIdeal, contains, graded_piece
from .polyring import BudgetExceeded, PrimePoly, monomials
from .quadform import QuadForm, restricted_rank


class PreconditionFailed(ValueError):
    def __init__(self, reason, witness=None):
        super().__init__(reason)
        self.reason = reason
        self.witness = witness


def in_I(x, L, p: int) -> np.ndarray:
    """n in I_L: -L < symmetric residue of n < L, for a rational L."""
    L = Fraction(L)
    r = np.asarray(x, dtype=np.int64) % p
    r = np.where(r > p // 2, r - p, r)
    return np.abs(r) * L.denominator < L.numerator


def in_I_tenth(x, p: int) -> np.ndarray:
    """Membership in I_{p/10}, exactly: 10 |tau(n)| < p."""
    r = np.asarray(x, dtype=np.int64) % p
    r = np.where(r > p // 2, r - p, r)
    return 10 * np.abs(r) < p


# ---------------------------------------------------------------------------
# structure-obstacle pairs

@dataclass
class StructureObstaclePair:
    C0: list
    Y: list
    K: int
    C: int
    D: int

    @staticmethod
    def trivial(p: int, d: int, K: int = 0, C: int = 0, D: int = 0) -> "StructureObstaclePair":
        return StructureObstaclePair([PrimePoly.zero(p, d)], [], K, C, D)

    def validate(self, M: QuadForm) -> None:
        """Raise PreconditionFailed unless the bounds and distinctness hold."""
        J = MIdeal(M, Subspace.trivial(M.p, M.d))
        if not any(f.is_zero() for f in self.C0):
            raise PreconditionFailed("C0 must contain 0")
        if len(self.C0) > self.K + 1:
            raise PreconditionFailed(f"|C0| = {len(self.C0)} exceeds K + 1 = {self.K + 1}")
        for a, b in itertools.combinations(self.C0, 2):
            if contains(J, a - b):
                raise PreconditionFailed("two members of C0 agree modulo J^M", (str(a), str(b)))
        if len(self.Y) > self.C:
            raise PreconditionFailed(f"Y has {len(self.Y)} parts, more than C = {self.C}")
        for W in self.Y:
            if W.dim > self.D:
                raise PreconditionFailed(f"a part of Y has dimension {W.dim} > D = {self.D}", W.basis)

    def nonzero(self) -> list:
        return [f for f in self.C0 if not f.is_zero()]

    def meets_Y(self, V: Subspace):
        for W in self.Y:
            I = V.intersect(W)
            if not I.is_trivial():
                return I.basis[0]
        return None

    def ideal_hits_C0(self, M: QuadForm, V: Subspace):
        I = MIdeal(M, V)
        for f in self.nonzero():
            if contains(I, f):
                return f
        return None

    def classifies(self, M: QuadForm, V: Subspace, f: PrimePoly) -> bool:
        """(0, J_V + f) meets Y or is related to some (0, J^M + g), g in C0."""
        if self.meets_Y(V) is not None:
            return True
        I = MIdeal(M, V)
        return any(contains(I, f - g) for g in self.C0)

    def to_json(self):
        return {"C0": [f.to_text() for f in self.C0], "Y": [W.to_json() for W in self.Y],
                "K": self.K, "C": self.C, "D": self.D}


# ---------------------------------------------------------------------------
# structure-obstacle decompositions

@dataclass
class SODecomposition:
    T: Subspace
    U: Subspace

    def verify(self, M: QuadForm, pair: StructureObstaclePair, d1: int, d2: int) -> dict:
        """Re-check every defining condition from scratch."""
        d = M.d
        out = {
            "dims": self.T.dim == d1 and self.U.dim == d2,
            "T_cap_U": self.T.intersect(self.U).is_trivial(),
            "T_plus_U": (self.T + self.U).dim == d,
            "C0_avoided": pair.ideal_hits_C0(M, self.U) is None,
            "Y_avoided": pair.meets_Y(self.U) is None,
            "M_rank": restricted_rank(M, self.U) == d2,
        }
        out["ok"] = all(out.values())
        return out

    def to_json(self, verification=None):
        obj = {"T_basis": [list(b) for b in self.T.basis], "U_basis": [list(b) for b in self.U.basis]}
        if verification is not None:
            obj["verification"] = verification
        return obj


@dataclass
class SOSearch:
    success: bool
    decompositions: list
    samples_used: int
    rejections: dict
    hypotheses: dict
    seed: int
    reason: str | None = None
    verifications: list = field(default_factory=list)

    @property
    def rejected_fraction(self) -> float:
        return sum(self.rejections.values()) / max(1, self.samples_used)

    def to_json(self):
        return {"success": self.success, "reason": self.reason, "seed": self.seed,
                "samples_used": self.samples_used, "rejections": dict(sorted(self.rejections.items())),
                "hypotheses": self.hypotheses,
                "decompositions": [D.to_json(v) for D, v in zip(self.decompositions, self.verifications)]}


def _reject_reason(M, pair, T, U, d2):
    """First failing condition for a candidate U, or None."""
    if U.dim != d2 or not T.intersect(U).is_trivial():
        return "T_cap_U"
    if restricted_rank(M, U) != d2:
        return "M_rank"
    if pair.meets_Y(U) is not None:
        return "Y"
    if pair.ideal_hits_C0(M, U) is not None:
        return "C0"
    return None


def find_so_decomposition(M: QuadForm, pair: StructureObstaclePair, d1: int, d2: int, R: int = 1,
                          samples: int = 10 ** 5, seed: int = 0) -> SOSearch:
    """R decompositions (T_i, U_i) with dim T_i = d1, dim U_i = d2 and T_1..T_R independent.

    Each U is sampled as the row space of [B(t), I] B, where the rows of B are
    a basis of T followed by a completion, and B(t) is a uniform d2 x d1 matrix.
    """
    p, d = M.p, M.d
    if d1 < 0 or d2 < 0 or d1 + d2 != d:
        raise ValueError(f"need d' + d'' = d, got {d1} + {d2} != {d}")
    if R < 1 or R * d1 > d:
        raise ValueError(f"{R} independent subspaces of dimension {d1} do not fit in dimension {d}")
    pair.validate(M)
    hyp = {"d1_ge_max_D_3": d1 >= max(pair.D, 3), "d2_ge_(R-1)d1": d2 >= (R - 1) * d1, "d_ge_4": d >= 4}
    rng = np.random.default_rng(seed)
    stats = Counter()
    # impossibilities visible from dimensions alone
    for W in pair.Y:
        if W.dim + d2 > d:
            return SOSearch(False, [], 0, dict(stats), hyp, seed,
                            f"a part of Y has dimension {W.dim}, so it meets every subspace of dimension {d2}")
    J = MIdeal(M, Subspace.trivial(p, d))
    for f in pair.nonzero():
        if contains(J, f):
            return SOSearch(False, [], 0, dict(stats), hyp, seed, "a nonzero member of C0 lies in J^M")
    found, verifs = [], []
    used = 0
    prevT = Subspace.trivial(p, d)
    for _ in range(R):
        Tb = random_independent(rng, p, d, d1, modulo=prevT)
        T = span(Tb, p, d)
        comp = []
        cur = T
        for e in range(d):
            u = tuple(int(i == e) for i in range(d))
            if not cur.contains(u):
                comp.append(u)
                cur = cur + span([u], p, d)
        B = np.array(list(Tb) + comp, dtype=np.int64)
        hit = None
        while used < samples:
            used += 1
            t = rng.integers(0, p, size=(d2, d1))
            rows = matmul_mod(np.hstack([t, np.eye(d2, dtype=np.int64)]), B, p)
            U = span(rows, p, d)
            why = _reject_reason(M, pair, T, U, d2)
            if why is None:
                hit = U
                break
            stats[why] += 1
        if hit is None:
            return SOSearch(False, found, used, dict(stats), hyp, seed,
                            f"no admissible U within {samples} samples", verifs)
        D_ = SODecomposition(T, hit)
        v = D_.verify(M, pair, d1, d2)
        if not v["ok"]:
            raise AssertionError(f"search accepted an invalid decomposition: {v}")
        found.append(D_)
        verifs.append(v)
        prevT = prevT + T
    indep = is_independent_tuple([D_.T for D_ in found], p, d)
    if not indep:
        raise AssertionError("T subspaces are not independent")
    return SOSearch(True, found, used, dict(stats), hyp, seed, None, verifs)


# ---------------------------------------------------------------------------
# separation lemma

@dataclass
class SeparationMap:
    Phi: np.ndarray  # (r + 1) x k; n -> Phi n
    p: int
    J: tuple
    a: tuple

    def apply(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.int64).reshape(-1, self.Phi.shape[1])
        return matmul_mod(pts, self.Phi.T, self.p)

    def to_json(self):
        return {"p": self.p, "Phi": self.Phi.tolist(), "J": [list(c) for c in self.J], "a": list(self.a)}


def build_separation_map(V: Subspace, J, a: int | None = None) -> SeparationMap:
    """Phi with, for every c in J: c in V, or V misses c + Phi^{-1}(I_{p/10}^{r+1}).

    Row i vanishes on V and sends c_i to -a_i (zero row when c_i is in V),
    so phi_i(V - c_i) = {a_i}. Row 0 is the zero map.
    """
    p, k = V.p, V.d
    J = [tuple(int(x) % p for x in c) for c in J]
    if not J or any(J[0]):
        zero = (0,) * k
        if zero not in J:
            raise ValueError("J must contain 0")
        J = [zero] + [c for c in J if any(c)]
    a = (p - 1) // 2 if a is None else a % p
    if in_I_tenth(a, p):
        raise ValueError(f"a = {a} lies in I_(p/10)")
    rows = [np.zeros(k, dtype=np.int64)]
    avals = [0]
    Vb = list(V.basis)
    for c in J[1:]:
        if V.contains(c):
            rows.append(np.zeros(k, dtype=np.int64))
            avals.append(0)
            continue
        # basis v_1..v_m, c, u_1.. ; phi(v_j) = 0, phi(c) = -a, phi(u_j) = 0
        basis = Vb + [c]
        cur = span(basis, p, k)
        for e in range(k):
            u = tuple(int(i == e) for i in range(k))
            if not cur.contains(u):
                basis.append(u)
                cur = cur + span([u], p, k)
        Bm = np.array(basis, dtype=np.int64)
        target = np.zeros(k, dtype=np.int64)
        target[len(Vb)] = (-a) % p
        # phi as a row vector w with Bm w = target
        sol = solve_linear(Bm, target, p)
        rows.append(np.array(sol.x, dtype=np.int64))
        avals.append(a)
    return SeparationMap(np.array(rows, dtype=np.int64).reshape(len(J), k), p, tuple(J), tuple(avals))


def verify_separation(S: SeparationMap, V: Subspace, budget: int = 10 ** 6) -> dict:
    """Exhaustive check of the disjunction over V."""
    p = S.p
    if V.size() > budget:
        raise BudgetExceeded(V.size(), budget)
    pts = V.points()
    bad = []
    exempt = 0
    for c in S.J:
        if V.contains(c):
            exempt += 1
            continue
        img = S.apply((pts - np.array(c, dtype=np.int64)) % p)
        inside = np.all(in_I_tenth(img, p), axis=1)
        if np.any(inside):
            bad.append((c, tuple(int(x) for x in pts[np.flatnonzero(inside)[0]])))
    return {"ok": not bad, "exempt": exempt, "separated": len(S.J) - exempt, "violations": bad,
            "points_checked": len(pts)}


# ---------------------------------------------------------------------------
# extracting a Freiman subset

def theta(f: PrimePoly, s: int) -> np.ndarray:
    """Coefficient flattening in the graded-lex monomial order."""
    return f.coeff_vector(s)


def cube_index(x, p: int) -> np.ndarray:
    """Cube label j with j p / 80 <= x < (j + 1) p / 80, representatives 0..p-1."""
    return (80 * (np.asarray(x, dtype=np.int64) % p)) // p


@dataclass
class Extraction:
    W_prime: list
    W_size: int
    bound: float
    cube: tuple
    separation: SeparationMap
    freiman: FreimanReport | None = None

    @property
    def bound_ok(self) -> bool:
        return len(self.W_prime) * 80 ** (len(self.separation.J)) >= self.W_size

    def to_json(self):
        return {"W_size": self.W_size, "W_prime_size": len(self.W_prime), "cube": list(self.cube),
                "bound_ok": self.bound_ok, "freiman": self.freiman.to_json() if self.freiman else None}


def classification_on_relations(xi, H, M: QuadForm, pair: StructureObstaclePair, n: int = 4,
                                s: int | None = None, budget: int = 10 ** 6, samples: int = 2000,
                                seed: int = 0) -> FreimanReport:
    """Check the pair classifies the pi = 0 part of the 2^(n-1)-fold sumset fiber of h -> (h, J_h + xi(h))."""
    p, d = M.p, M.d

    def bad(left, right, omega):
        V = span(list(left + right), p, d)
        f = PrimePoly.from_coeff_vector(omega, p, d, s)
        return not pair.classifies(M, V, f)

    if s is None:
        s = max([f.degree() for f in (xi.values() if isinstance(xi, dict) else [])] + [0])
    return relation_check(xi, H, M, bad, n, s, budget, samples, seed)


def extract_freiman_subset(W, pair: StructureObstaclePair, V: Subspace, xi, M: QuadForm, s: int,
                           samples: int = 2000, seed: int = 0, check: bool = True,
                           budget: int = 10 ** 5) -> Extraction:
    """Pigeonhole W over cubes of side p/80 in Phi(theta(xi(h)))."""
    p, d = M.p, M.d
    W = sorted(set(tuple(int(x) % p for x in h) for h in W))
    pair.validate(M)
    for h in W:
        if not V.contains(h):
            raise PreconditionFailed("W is not inside V", h)
    f = pair.ideal_hits_C0(M, V)
    if f is not None:
        raise PreconditionFailed("J^M_V meets C0 outside 0", f.to_text())
    y = pair.meets_Y(V)
    if y is not None:
        raise PreconditionFailed("V meets Y outside 0", y)
    look = xi if isinstance(xi, dict) else {h: xi(h) for h in W}
    Vt = graded_piece(M, V, s).subspace(p, len(monomials(d, s)))
    Sep = build_separation_map(Vt, [theta(g, s) for g in pair.C0])
    if not W:
        return Extraction([], 0, 0.0, (), Sep, None)
    vals = Sep.apply(np.array([theta(look[h], s) for h in W], dtype=np.int64))
    labels = [tuple(int(x) for x in r) for r in cube_index(vals, p)]
    counts = Counter(labels)
    best = min(counts, key=lambda c: (-counts[c], c))
    Wp = [h for h, c in zip(W, labels) if c == best]
    ex = Extraction(Wp, len(W), len(W) / 80 ** len(Sep.J), best, Sep)
    if not ex.bound_ok:
        raise AssertionError("pigeonhole bound violated")
    if check:
        ex.freiman = is_freiman_hom({h: look[h] for h in Wp}, Wp, M, n=4, s=s, budget=budget,
                                    samples=samples, seed=seed)
    return ex
