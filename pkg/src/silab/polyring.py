"""Multivariate polynomials over F_p.

A polynomial is an immutable sorted tuple of (exponent tuple, residue) pairs in
descending graded-lex order.  Text format: ``3*x1^2*x3 + 5*x2 + 1``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .field_linalg import check_modulus, DimensionMismatch

DEGREE_CAP = 8


class BudgetExceeded(RuntimeError):
    def __init__(self, needed, budget):
        super().__init__(f"enumeration needs {needed} points, budget is {budget}")
        self.needed = needed
        self.budget = budget


def order_key(e):
    # descending graded lex: higher degree first, then lex on exponents
    return (-sum(e), tuple(-x for x in e))


@lru_cache(maxsize=None)
def monomials(d: int, s: int) -> tuple:
    """Exponent tuples of degree exactly s, in descending lex order (x1^s first)."""
    if s < 0:
        return ()
    if d == 1:
        return ((s,),)
    out = []
    for a in range(s, -1, -1):
        for rest in monomials(d - 1, s - a):
            out.append((a,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(d: int, s: int) -> dict:
    return {m: i for i, m in enumerate(monomials(d, s))}


def num_monomials(d: int, s: int) -> int:
    return len(monomials(d, s))


@dataclass(frozen=True)
class PrimePoly:
    p: int
    d: int
    terms: tuple = ()

    @staticmethod
    def from_dict(coeffs: dict, p: int, d: int) -> "PrimePoly":
        items = []
        for e, c in coeffs.items():
            c = int(c) % p
            if c:
                e = tuple(int(x) for x in e)
                if len(e) != d:
                    raise DimensionMismatch("exponent length differs from d")
                items.append((e, c))
        items.sort(key=lambda t: order_key(t[0]))
        return PrimePoly(p, d, tuple(items))

    @staticmethod
    def zero(p: int, d: int) -> "PrimePoly":
        return PrimePoly(p, d, ())

    @staticmethod
    def const(c: int, p: int, d: int) -> "PrimePoly":
        return PrimePoly.from_dict({(0,) * d: c}, p, d)

    @staticmethod
    def var(i: int, p: int, d: int) -> "PrimePoly":
        """The coordinate x_{i+1} (0-based index i)."""
        e = [0] * d
        e[i] = 1
        return PrimePoly.from_dict({tuple(e): 1}, p, d)

    @staticmethod
    def linear(coeffs, p: int, d: int) -> "PrimePoly":
        """c_1 x_1 + ... + c_d x_d."""
        out = {}
        for i, c in enumerate(coeffs):
            e = [0] * d
            e[i] = 1
            out[tuple(e)] = c
        return PrimePoly.from_dict(out, p, d)

    @staticmethod
    def monomial(e, c=1, p=None, d=None) -> "PrimePoly":
        return PrimePoly.from_dict({tuple(e): c}, p, len(e) if d is None else d)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def _same(self, other):
        if (self.p, self.d) != (other.p, other.d):
            raise DimensionMismatch("polynomials over different rings")

    def _lift(self, other):
        if isinstance(other, PrimePoly):
            self._same(other)
            return other
        return PrimePoly.const(int(other), self.p, self.d)

    def __add__(self, other):
        other = self._lift(other)
        out = self.as_dict()
        for e, c in other.terms:
            out[e] = (out.get(e, 0) + c) % self.p
        return PrimePoly.from_dict(out, self.p, self.d)

    __radd__ = __add__

    def __neg__(self):
        return PrimePoly(self.p, self.d, tuple((e, (-c) % self.p) for e, c in self.terms))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c: int) -> "PrimePoly":
        c %= self.p
        if c == 0:
            return PrimePoly.zero(self.p, self.d)
        return PrimePoly(self.p, self.d, tuple((e, (c * x) % self.p) for e, x in self.terms))

    def __mul__(self, other):
        if not isinstance(other, PrimePoly):
            return self.scale(int(other))
        self._same(other)
        out = {}
        p = self.p
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = (out.get(e, 0) + c1 * c2) % p
        return PrimePoly.from_dict(out, p, self.d)

    def __rmul__(self, other):
        return self.scale(int(other))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = PrimePoly.const(1, self.p, self.d)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial (which has every degree)."""
        return max((sum(e) for e, _ in self.terms), default=-1)

    def has_degree_at_most(self, s: int) -> bool:
        return self.degree() <= s

    def homogeneous_component(self, s: int) -> "PrimePoly":
        return PrimePoly(self.p, self.d, tuple(t for t in self.terms if sum(t[0]) == s))

    def components(self) -> dict:
        out = {}
        for e, c in self.terms:
            out.setdefault(sum(e), []).append((e, c))
        return {s: PrimePoly(self.p, self.d, tuple(ts)) for s, ts in sorted(out.items())}

    def is_homogeneous(self, s: int | None = None) -> bool:
        degs = {sum(e) for e, _ in self.terms}
        if not degs:
            return True
        if len(degs) > 1:
            return False
        return s is None or degs == {s}

    def coefficient(self, e) -> int:
        return self.as_dict().get(tuple(e), 0)

    def coeff_vector(self, s: int) -> np.ndarray:
        """Coefficients of the degree-s part on monomials(d, s)."""
        idx = monomial_index(self.d, s)
        out = np.zeros(len(idx), dtype=np.int64)
        for e, c in self.terms:
            if sum(e) == s:
                out[idx[e]] = c
        return out

    @staticmethod
    def from_coeff_vector(v, p: int, d: int, s: int) -> "PrimePoly":
        mons = monomials(d, s)
        return PrimePoly.from_dict({m: int(c) for m, c in zip(mons, v) if int(c) % p}, p, d)

    def eval(self, n) -> int:
        if len(n) != self.d:
            raise DimensionMismatch("point dimension differs from d")
        p = self.p
        total = 0
        for e, c in self.terms:
            t = c
            for x, a in zip(n, e):
                if a:
                    t = (t * pow(int(x), a, p)) % p
            total += t
        return total % p

    __call__ = eval

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.int64) % self.p
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise DimensionMismatch("points array has wrong shape")
        p = self.p
        N = pts.shape[0]
        out = np.zeros(N, dtype=np.int64)
        if not self.terms:
            return out
        top = max(max(e) for e, _ in self.terms)
        powers = [[np.ones(N, dtype=np.int64)] for _ in range(self.d)]
        for i in range(self.d):
            for _ in range(top):
                powers[i].append((powers[i][-1] * pts[:, i]) % p)
        for e, c in self.terms:
            t = np.full(N, c, dtype=np.int64)
            for i, a in enumerate(e):
                if a:
                    t = (t * powers[i][a]) % p
            out = (out + t) % p
        return out

    def substitute_linear(self, T: np.ndarray, offset=None) -> "PrimePoly":
        """Polynomial in t of f(t @ T + offset), for a k x d matrix T."""
        T = np.asarray(T, dtype=np.int64) % self.p
        k = T.shape[0]
        xs = []
        for j in range(self.d):
            f = PrimePoly.linear([int(T[i, j]) for i in range(k)], self.p, k)
            if offset is not None:
                f = f + int(offset[j])
            xs.append(f)
        out = PrimePoly.zero(self.p, k)
        for e, c in self.terms:
            t = PrimePoly.const(c, self.p, k)
            for j, a in enumerate(e):
                if a:
                    t = t * xs[j] ** a
            out = out + t
        return out

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            factors = [str(c)]
            for i, a in enumerate(e):
                if a == 1:
                    factors.append(f"x{i + 1}")
                elif a > 1:
                    factors.append(f"x{i + 1}^{a}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __str__(self):
        return self.to_text()

    @staticmethod
    def from_text(text: str, p: int, d: int) -> "PrimePoly":
        check_modulus(p)
        text = text.replace(" ", "")
        if text in ("", "0"):
            return PrimePoly.zero(p, d)
        out = {}
        for raw in re.split(r"\+", text.replace("-", "+-")):
            if not raw:
                continue
            sign = 1
            if raw.startswith("-"):
                sign, raw = -1, raw[1:]
            coeff = 1
            e = [0] * d
            for fac in raw.split("*"):
                m = re.fullmatch(r"x(\d+)(?:\^(\d+))?", fac)
                if m:
                    i = int(m.group(1)) - 1
                    if not 0 <= i < d:
                        raise DimensionMismatch(f"variable x{i + 1} outside d={d}")
                    e[i] += int(m.group(2) or 1)
                elif re.fullmatch(r"\d+", fac):
                    coeff *= int(fac)
                else:
                    raise ValueError(f"cannot parse factor {fac!r}")
            key = tuple(e)
            out[key] = (out.get(key, 0) + sign * coeff) % p
        return PrimePoly.from_dict(out, p, d)


def random_homogeneous(rng, p: int, d: int, s: int, density: float = 1.0) -> PrimePoly:
    mons = monomials(d, s)
    coeffs = {}
    for m in mons:
        if density >= 1.0 or rng.random() < density:
            coeffs[m] = int(rng.integers(0, p))
    return PrimePoly.from_dict(coeffs, p, d)


def random_poly(rng, p: int, d: int, max_deg: int, density: float = 0.5) -> PrimePoly:
    out = PrimePoly.zero(p, d)
    for s in range(max_deg + 1):
        out = out + random_homogeneous(rng, p, d, s, density)
    return out


def variety(f: PrimePoly, budget: int = 10 ** 8) -> list:
    """V(f) by full enumeration, in lexicographic order."""
    from .field_linalg import grid_points

    need = f.p ** f.d
    if need > budget:
        raise BudgetExceeded(need, budget)
    pts = grid_points(f.p, f.d)
    vals = f.eval_many(pts)
    return [tuple(int(x) for x in row) for row in pts[vals == 0]]


@dataclass(frozen=True)
class ZeroVerdict:
    is_zero: bool
    exact: bool
    witness: tuple | None = None
    failure_bound: Fraction = Fraction(0)


def is_zero_by_sampling(f: PrimePoly, trials: int, rng=None, budget: int = 0) -> ZeroVerdict:
    """Decide f == 0 as a function; nonzero verdicts carry a witness point."""
    if f.is_zero():
        return ZeroVerdict(True, True)
    deg = f.degree()
    if deg >= f.p:
        raise ValueError("degree must be below p for a sampling verdict")
    if budget and f.p ** f.d <= budget:
        from .field_linalg import grid_points

        pts = grid_points(f.p, f.d)
        vals = f.eval_many(pts)
        nz = np.flatnonzero(vals)
        if nz.size:
            return ZeroVerdict(False, True, tuple(int(x) for x in pts[nz[0]]))
        return ZeroVerdict(True, True)
    if rng is None:
        rng = np.random.default_rng(0)
    for _ in range(trials):
        n = tuple(int(x) for x in rng.integers(0, f.p, size=f.d))
        if f.eval(n):
            return ZeroVerdict(False, True, n)
    return ZeroVerdict(True, False, None, Fraction(deg, f.p) ** trials)


def product_of(polys, p, d) -> PrimePoly:
    out = PrimePoly.const(1, p, d)
    for g in polys:
        out = out * g
    return out


def monomials_up_to(d: int, s: int):
    return list(itertools.chain.from_iterable(monomials(d, t) for t in range(s, -1, -1)))
