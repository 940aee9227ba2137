"""Exact linear algebra over F_p.

Vectors are plain tuples of residues; the modulus travels with the container
(Subspace, QuadForm, ...) rather than with every scalar.  Matrices are numpy
int64 arrays.  All moduli are odd primes below 2**31, so a product of two
residues fits in 63 bits.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_P = 2 ** 31


class DimensionMismatch(ValueError):
    pass


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def check_modulus(p: int) -> int:
    p = int(p)
    if p == 2 or p >= MAX_P or not is_prime(p):
        raise ValueError(f"modulus must be an odd prime below 2^31, got {p}")
    return p


@dataclass(frozen=True)
class FpScalar:
    value: int
    p: int

    def __post_init__(self):
        check_modulus(self.p)
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _coerce(self, other):
        if isinstance(other, FpScalar):
            if other.p != self.p:
                raise DimensionMismatch("mixed moduli")
            return other.value
        return int(other) % self.p

    def __add__(self, other):
        return FpScalar(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FpScalar(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return FpScalar(self._coerce(other) - self.value, self.p)

    def __mul__(self, other):
        return FpScalar(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FpScalar(-self.value, self.p)

    def inverse(self):
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return FpScalar(pow(self.value, self.p - 2, self.p), self.p)

    def __truediv__(self, other):
        return self * FpScalar(self._coerce(other), self.p).inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FpScalar(pow(self.value, e, self.p), self.p)

    def __int__(self):
        return self.value

    def symmetric(self) -> int:
        """Representative in (-p/2, p/2)."""
        return self.value - self.p if self.value > self.p // 2 else self.value


def inv(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in F_p")
    return pow(a, p - 2, p)


def vec(coords, p: int) -> tuple:
    return tuple(int(c) % p for c in coords)


def unit(i: int, d: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(d))


def dot(a, b, p: int) -> int:
    return sum(int(x) * int(y) for x, y in zip(a, b)) % p


def vadd(a, b, p: int) -> tuple:
    return tuple((x + y) % p for x, y in zip(a, b))


def vsub(a, b, p: int) -> tuple:
    return tuple((x - y) % p for x, y in zip(a, b))


def vscale(c: int, a, p: int) -> tuple:
    return tuple((c * x) % p for x in a)


def is_zero(v) -> bool:
    return not any(v)


def symmetric_residue(x: int, p: int) -> int:
    x %= p
    return x - p if x > p // 2 else x


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p without int64 overflow."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    inner = a.shape[-1] if a.ndim else 1
    if inner == 0:
        return np.zeros(a.shape[:-1] + b.shape[1:], dtype=np.int64)
    if (p - 1) ** 2 * inner < 2 ** 62:
        return (a @ b) % p
    out = a.astype(object) @ b.astype(object)
    return (np.asarray(out) % p).astype(np.int64)


def rref(mat, p: int):
    """Reduced row echelon form. Returns (R, pivots) with zero rows dropped."""
    A = np.array(mat, dtype=np.int64, copy=True)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    A %= p
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        a = int(A[r, c])
        if a != 1:
            A[r] = (A[r] * inv(a, p)) % p
        col = A[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            A[hit] = (A[hit] - np.outer(col[hit], A[r]) % p) % p
        pivots.append(c)
        r += 1
    return A[:r].copy(), pivots


def rank(mat, p: int) -> int:
    A = np.asarray(mat)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def reduce_rows(x: np.ndarray, R: np.ndarray, pivots, p: int) -> np.ndarray:
    """Normal form of the rows of x modulo the row space of an RREF matrix R."""
    x = np.asarray(x, dtype=np.int64) % p
    if len(pivots) == 0:
        return x
    coeff = x[..., pivots]
    return (x - matmul_mod(coeff, R, p)) % p


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of F_p^d stored as its canonical RREF basis."""

    p: int
    d: int
    basis: tuple = ()

    def __post_init__(self):
        check_modulus(self.p)
        if self.d < 1:
            raise DimensionMismatch("ambient dimension must be positive")

    @staticmethod
    def trivial(p: int, d: int) -> "Subspace":
        return Subspace(p, d, ())

    @staticmethod
    def full(p: int, d: int) -> "Subspace":
        return Subspace(p, d, tuple(unit(i, d) for i in range(d)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, self.d), dtype=np.int64)
        return np.array(self.basis, dtype=np.int64)

    @property
    def pivots(self):
        return [next(j for j, x in enumerate(row) if x) for row in self.basis]

    def is_trivial(self) -> bool:
        return not self.basis

    def _check(self, other: "Subspace"):
        if (self.p, self.d) != (other.p, other.d):
            raise DimensionMismatch("subspaces live in different ambient spaces")

    def reduce(self, v) -> tuple:
        if len(v) != self.d:
            raise DimensionMismatch("vector length differs from ambient dimension")
        if not self.basis:
            return vec(v, self.p)
        r = reduce_rows(np.array([v]), self.matrix(), self.pivots, self.p)[0]
        return tuple(int(x) for x in r)

    def contains(self, v) -> bool:
        return is_zero(self.reduce(v))

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def contains_subspace(self, other: "Subspace") -> bool:
        self._check(other)
        return all(self.contains(b) for b in other.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return span(list(self.basis) + list(other.basis), self.p, self.d)

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        if self.is_trivial() or other.is_trivial():
            return Subspace.trivial(self.p, self.d)
        # (a, b) with a.A = b.B  <=>  left kernel of [A; -B]
        A, B = self.matrix(), other.matrix()
        stacked = np.vstack([A, (-B) % self.p])
        K = kernel(stacked.T, self.p)
        if K.is_trivial():
            return Subspace.trivial(self.p, self.d)
        coeff = K.matrix()[:, : self.dim]
        return span(matmul_mod(coeff, A, self.p), self.p, self.d)

    def __and__(self, other):
        return self.intersect(other)

    def points(self, offset=None) -> np.ndarray:
        """All p^dim points of V (+ offset) as an array, lexicographic in the coordinates."""
        n = self.dim
        grid = grid_points(self.p, n)
        pts = matmul_mod(grid, self.matrix(), self.p) if n else np.zeros((1, self.d), dtype=np.int64)
        if offset is not None:
            pts = (pts + np.asarray(offset, dtype=np.int64)) % self.p
        return pts

    def size(self) -> int:
        return self.p ** self.dim

    def complement_basis(self) -> list:
        """Unit vectors on the non-pivot columns; they span a complement."""
        piv = set(self.pivots)
        return [unit(j, self.d) for j in range(self.d) if j not in piv]

    def to_json(self):
        return {"p": self.p, "d": self.d, "basis": [list(r) for r in self.basis]}

    @staticmethod
    def from_json(obj) -> "Subspace":
        return span(obj["basis"], obj["p"], obj["d"])


def grid_points(p: int, n: int) -> np.ndarray:
    """All of F_p^n as a (p^n, n) array, first coordinate slowest."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    axes = np.meshgrid(*([np.arange(p, dtype=np.int64)] * n), indexing="ij")
    return np.stack([a.reshape(-1) for a in axes], axis=1)


def span(vectors, p: int, d: int | None = None) -> Subspace:
    vectors = [tuple(int(x) for x in v) for v in vectors]
    if d is None:
        if not vectors:
            raise DimensionMismatch("ambient dimension needed for an empty span")
        d = len(vectors[0])
    if any(len(v) != d for v in vectors):
        raise DimensionMismatch("vectors of different lengths")
    if not vectors:
        return Subspace(p, d, ())
    R, _ = rref(np.array(vectors, dtype=np.int64), p)
    return Subspace(p, d, tuple(tuple(int(x) for x in row) for row in R))


def kernel(mat, p: int) -> Subspace:
    """{x : mat @ x = 0} as a Subspace of F_p^cols."""
    A = np.asarray(mat, dtype=np.int64)
    cols = A.shape[1]
    if A.shape[0] == 0:
        return Subspace.full(p, cols)
    R, pivots = rref(A, p)
    free = [j for j in range(cols) if j not in set(pivots)]
    basis = []
    for f in free:
        x = [0] * cols
        x[f] = 1
        for i, c in enumerate(pivots):
            x[c] = int(-R[i, f]) % p
        basis.append(x)
    return span(basis, p, cols)


@dataclass(frozen=True)
class LinearSolution:
    x: tuple
    kernel: Subspace


def solve_linear(system, rhs, p: int):
    """Solve system @ x = rhs. Returns LinearSolution, or None when infeasible."""
    A = np.asarray(system, dtype=np.int64)
    b = np.asarray(rhs, dtype=np.int64).reshape(-1)
    if A.ndim != 2 or A.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"system {A.shape} and rhs {b.shape} do not match")
    rows, cols = A.shape
    if cols == 0:
        if np.any(b % p):
            return None
        # no unknowns: the kernel is the zero-dimensional space, recorded as None
        return LinearSolution((), None)
    aug = np.hstack([A % p, (b % p).reshape(-1, 1)])
    R, pivots = rref(aug, p)
    if cols in pivots:
        return None
    x = [0] * cols
    for i, c in enumerate(pivots):
        x[c] = int(R[i, cols])
    return LinearSolution(tuple(x), kernel(A, p) if rows else Subspace.full(p, cols))


def is_independent_tuple(items, p: int, d: int, modulo: Subspace | None = None) -> bool:
    """Independence of a tuple of vectors and/or subspaces, optionally modulo U.

    A zero vector (or a vector inside U) is dependent with everything, while a
    trivial subspace is independent with everything.
    """
    U = modulo if modulo is not None else Subspace.trivial(p, d)
    spaces = []
    for it in items:
        if isinstance(it, Subspace):
            if (it.p, it.d) != (p, d):
                raise DimensionMismatch("ambient mismatch")
            spaces.append(it)
        else:
            v = vec(it, p)
            if len(v) != d:
                raise DimensionMismatch("ambient mismatch")
            if U.contains(v):
                return False
            spaces.append(span([v], p, d))
    total = U
    expected = U.dim
    for S in spaces:
        expected += (S + U).dim - U.dim
        total = total + S
    return total.dim == expected


def random_vector(rng, p: int, d: int, nonzero=False) -> tuple:
    while True:
        v = tuple(int(x) for x in rng.integers(0, p, size=d))
        if not nonzero or any(v):
            return v


def random_independent(rng, p: int, d: int, k: int, modulo: Subspace | None = None) -> list:
    """k vectors independent modulo `modulo` (default trivial)."""
    U = modulo if modulo is not None else Subspace.trivial(p, d)
    if U.dim + k > d:
        raise ValueError("not enough room for that many independent vectors")
    out = []
    cur = U
    while len(out) < k:
        v = random_vector(rng, p, d)
        if not cur.contains(v):
            out.append(v)
            cur = cur + span([v], p, d)
    return out


def random_subspace(rng, p: int, d: int, k: int) -> Subspace:
    return span(random_independent(rng, p, d, k), p, d) if k else Subspace.trivial(p, d)


def all_combinations(vectors, p: int):
    """Brute-force span enumeration (oracle for tiny cases)."""
    d = len(vectors[0])
    seen = set()
    for cs in itertools.product(range(p), repeat=len(vectors)):
        v = [0] * d
        for c, w in zip(cs, vectors):
            for j in range(d):
                v[j] = (v[j] + c * w[j]) % p
        seen.add(tuple(v))
    return seen
