"""Relation graphs, auxiliary graphs, #dd and #cc, Mycielskians, weak-core decomposition.

#dd(G) is computed as ceil of the fractional clique cover number.  A right
vertex of an auxiliary graph is interchangeable with the clique formed by its
neighbourhood, so a C^{-1}-dense auxiliary graph is the same thing as a
probability distribution on cliques covering every vertex with mass >= 1/C.
Replacing a clique by a maximal clique containing it never lowers coverage,
so only maximal cliques need to enter the LP.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .field_linalg import Subspace


@dataclass(frozen=True)
class RelGraph:
    n: int
    edges: frozenset  # of frozenset({u, v}) with u != v
    labels: tuple = ()

    @staticmethod
    def from_edges(n: int, edges, labels=()) -> "RelGraph":
        es = set()
        for u, v in edges:
            if u == v:
                raise ValueError("relation graphs have no self-loops")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError("edge endpoint out of range")
            es.add(frozenset((u, v)))
        return RelGraph(n, frozenset(es), tuple(labels))

    @staticmethod
    def from_gamma(X) -> "RelGraph":
        from .gamma import related
        X = list(X)
        edges = [(i, j) for i, j in itertools.combinations(range(len(X)), 2) if related(X[i], X[j])]
        return RelGraph.from_edges(len(X), edges, tuple(X))

    @staticmethod
    def complete(n: int) -> "RelGraph":
        return RelGraph.from_edges(n, itertools.combinations(range(n), 2))

    @staticmethod
    def empty(n: int) -> "RelGraph":
        return RelGraph.from_edges(n, [])

    @staticmethod
    def cycle(n: int) -> "RelGraph":
        return RelGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @staticmethod
    def from_networkx(g) -> "RelGraph":
        nodes = sorted(g.nodes())
        pos = {v: i for i, v in enumerate(nodes)}
        return RelGraph.from_edges(len(nodes), [(pos[u], pos[v]) for u, v in g.edges()])

    def adj(self) -> list:
        out = [set() for _ in range(self.n)]
        for e in self.edges:
            u, v = tuple(e)
            out[u].add(v)
            out[v].add(u)
        return out

    def has_edge(self, u, v) -> bool:
        return frozenset((u, v)) in self.edges

    def is_clique(self, S) -> bool:
        S = list(S)
        return all(self.has_edge(u, v) for u, v in itertools.combinations(S, 2))

    def induced(self, S) -> "RelGraph":
        S = list(S)
        pos = {v: i for i, v in enumerate(S)}
        es = [(pos[u], pos[v]) for u, v in (tuple(e) for e in self.edges) if u in pos and v in pos]
        labels = tuple(self.labels[v] for v in S) if self.labels else ()
        return RelGraph.from_edges(len(S), es, labels)

    def add_isolated(self) -> "RelGraph":
        return RelGraph.from_edges(self.n + 1, [tuple(e) for e in self.edges])

    def complement(self) -> "RelGraph":
        return RelGraph.from_edges(self.n, [(u, v) for u, v in itertools.combinations(range(self.n), 2)
                                            if not self.has_edge(u, v)])

    def is_triangle_free(self) -> bool:
        A = self.adj()
        return not any(A[u] & A[v] for u, v in (tuple(e) for e in self.edges))

    def to_edge_list(self) -> str:
        """DIMACS-like text: 'p edge n m' then 'e u v' with 1-based vertices."""
        lines = [f"p edge {self.n} {len(self.edges)}"]
        for u, v in sorted(tuple(sorted(e)) for e in self.edges):
            lines.append(f"e {u + 1} {v + 1}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_edge_list(text: str) -> "RelGraph":
        n, edges = 0, []
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "p":
                n = int(parts[2])
            elif parts[0] == "e":
                edges.append((int(parts[1]) - 1, int(parts[2]) - 1))
        return RelGraph.from_edges(n, edges)


def maximal_cliques(G: RelGraph) -> list:
    """Bron-Kerbosch with pivoting; cliques as sorted tuples, sorted."""
    A = G.adj()
    out = []

    def bk(R, P, X):
        if not P and not X:
            out.append(tuple(sorted(R)))
            return
        pivot = max(P | X, key=lambda u: len(A[u] & P))
        for v in sorted(P - A[pivot]):
            bk(R | {v}, P & A[v], X & A[v])
            P = P - {v}
            X = X | {v}

    if G.n:
        bk(set(), set(range(G.n)), set())
    return sorted(out)


def max_independent_set(G: RelGraph) -> list:
    best = max(maximal_cliques(G.complement()), key=lambda c: (len(c), [-x for x in c]), default=())
    return list(best)


def independence_number(G: RelGraph) -> int:
    return len(max_independent_set(G)) if G.n else 0


# ---------------------------------------------------------------------------
# clique cover number

@dataclass
class CoverResult:
    value: int
    partition: list
    exact: bool
    lower: int
    upper: int


def _greedy_cover(G: RelGraph) -> list:
    A = G.adj()
    left = set(range(G.n))
    parts = []
    while left:
        v = min(left)
        part = [v]
        cand = (A[v] & left) - {v}
        while cand:
            u = max(sorted(cand), key=lambda x: len(A[x] & cand))
            part.append(u)
            cand &= A[u]
        parts.append(sorted(part))
        left -= set(part)
    return parts


def cc_number(G: RelGraph, budget: int = 40) -> CoverResult:
    """Minimum number of cliques partitioning the vertices (colouring of the complement)."""
    if G.n == 0:
        return CoverResult(0, [], True, 0, 0)
    greedy = _greedy_cover(G)
    lower = independence_number(G) if G.n <= 2 * budget else 1
    if G.n > budget:
        return CoverResult(len(greedy), greedy, False, lower, len(greedy))
    A = G.adj()
    n = G.n
    best = [len(greedy), greedy]
    # vertices in order of fewest neighbours in G (most constrained in the complement)
    order = sorted(range(n), key=lambda v: (len(A[v]), v))
    parts: list = []

    def rec(i):
        if len(parts) >= best[0]:
            return
        if i == n:
            best[0] = len(parts)
            best[1] = [sorted(p) for p in parts]
            return
        v = order[i]
        for part in parts:
            if all(u in A[v] for u in part):
                part.append(v)
                rec(i + 1)
                part.pop()
        if len(parts) + 1 < best[0]:
            parts.append([v])
            rec(i + 1)
            parts.pop()

    if best[0] > lower:
        rec(0)
    part = sorted(best[1])
    assert validate_partition(G, part)
    return CoverResult(best[0], part, True, lower, best[0])


def validate_partition(G: RelGraph, parts) -> bool:
    seen = sorted(v for p in parts for v in p)
    return seen == list(range(G.n)) and all(G.is_clique(p) for p in parts)


# ---------------------------------------------------------------------------
# exact LP for the fractional clique cover number

def simplex_max(A, b, c):
    """max c.x s.t. A x <= b, x >= 0, b >= 0, exact Fractions, Bland's rule.

    Returns (value, x, y) with y the optimal dual (y >= 0, y A >= c, y.b = value).
    """
    m, n = len(A), len(c)
    T = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(m)] + [Fraction(b[i])]
         for i, row in enumerate(A)]
    z = [Fraction(-v) for v in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = [n + i for i in range(m)]
    while True:
        enter = next((j for j in range(n + m) if z[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise ArithmeticError("unbounded LP")
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * b_ for a, b_ in zip(T[i], T[leave])]
        f = z[enter]
        z = [a - f * b_ for a, b_ in zip(z, T[leave])]
        basis[leave] = enter
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = T[i][-1]
    y = z[n:n + m]
    return z[-1], x, y


@dataclass
class DDResult:
    value: int
    fractional: Fraction  # fractional clique cover number
    weights: dict  # clique -> weight (optimal cover, sums to `fractional`)
    vertex_weights: list  # optimal fractional independent set
    exact: bool = True

    @property
    def t_star(self) -> Fraction:
        return 1 / self.fractional if self.fractional else Fraction(0)


def fractional_cover(G: RelGraph) -> DDResult:
    if G.n == 0:
        return DDResult(0, Fraction(0), {}, [])
    cliques = maximal_cliques(G)
    A = [[1 if v in C else 0 for v in range(G.n)] for C in cliques]
    value, w, y = simplex_max(A, [1] * len(cliques), [1] * G.n)
    weights = {C: y[i] for i, C in enumerate(cliques) if y[i]}
    # certify: primal cover and dual packing both feasible with equal value
    assert all(v >= 0 for v in w) and all(v >= 0 for v in y)
    assert all(sum(w[v] for v in C) <= 1 for C in cliques)
    assert all(sum(wt for C, wt in weights.items() if v in C) >= 1 for v in range(G.n))
    assert sum(w) == value == sum(weights.values())
    return DDResult(math.ceil(value), value, weights, w)


def dd_number(G: RelGraph, budget: int = 40) -> DDResult:
    if G.n > budget:
        cc = cc_number(G, budget)
        lo = max(1, math.ceil(G.n / max(1, max((len(c) for c in maximal_cliques(G)), default=1))))
        return DDResult(cc.value, Fraction(lo), {}, [], exact=False)
    return fractional_cover(G)


# ---------------------------------------------------------------------------
# auxiliary graphs

@dataclass(frozen=True)
class AuxGraph:
    n: int  # left vertices 0..n-1
    right: tuple  # one frozenset neighbourhood per right vertex

    def is_auxiliary(self, G: RelGraph) -> bool:
        return self.n == G.n and all(G.is_clique(N) for N in self.right)

    def degrees(self) -> list:
        deg = [0] * self.n
        for N in self.right:
            for v in N:
                deg[v] += 1
        return deg

    def density(self) -> Fraction:
        if not self.right:
            return Fraction(0)
        return Fraction(min(self.degrees()), len(self.right)) if self.n else Fraction(1)

    def is_dense(self, eps: Fraction) -> bool:
        return self.density() >= eps

    def duplicate(self, N: int) -> "AuxGraph":
        return AuxGraph(self.n, tuple(nb for nb in self.right for _ in range(N)))


def aux_from_weights(n: int, weights: dict) -> AuxGraph:
    """Integer-scaled auxiliary graph realising a fractional clique cover."""
    den = 1
    for w in weights.values():
        den = den * w.denominator // math.gcd(den, w.denominator)
    right = []
    for C, w in sorted(weights.items()):
        right.extend([frozenset(C)] * int(w * den))
    return AuxGraph(n, tuple(right))


def dd_certificate(G: RelGraph) -> AuxGraph:
    res = fractional_cover(G)
    aux = aux_from_weights(G.n, res.weights)
    assert aux.is_auxiliary(G) and aux.is_dense(Fraction(1, res.value))
    return aux


def multifold_cover_number(G: RelGraph, tau: int, node_budget: int = 10 ** 6) -> int | None:
    """Fewest cliques (with repetition) covering every vertex at least tau times."""
    cliques = maximal_cliques(G)
    n = G.n
    if n == 0:
        return 0
    by_vertex = [[i for i, C in enumerate(cliques) if v in C] for v in range(n)]
    omega = max(len(C) for C in cliques)
    best = [None]
    nodes = [0]
    need = [tau] * n

    def rec2(used, need):
        nodes[0] += 1
        if nodes[0] > node_budget:
            raise TimeoutError
        deficit = sum(need)
        if deficit == 0:
            if best[0] is None or used < best[0]:
                best[0] = used
            return
        if best[0] is not None and used + math.ceil(deficit / omega) >= best[0]:
            return
        v = max(range(n), key=lambda u: (need[u], -len(by_vertex[u]), -u))
        for i in by_vertex[v]:
            C = cliques[i]
            rec2(used + 1, tuple(max(0, need[u] - 1) if u in C else need[u] for u in range(n)))

    try:
        rec2(0, tuple(need))
    except TimeoutError:
        return None
    return best[0]


def dd_bruteforce(G: RelGraph, tau_max: int = 4, node_budget: int = 10 ** 6) -> int | None:
    """min over tau of ceil(chi_tau / tau), where chi_tau is the tau-fold clique cover number.

    A tau-fold cover by m cliques is an auxiliary graph with m right vertices and
    left degrees >= tau, i.e. a (tau/m)-dense one, and conversely.
    """
    if G.n == 0:
        return 0
    # a clique meets an independent set at most once, so no cover beats alpha
    floor = independence_number(G)
    best = None
    for tau in range(1, tau_max + 1):
        m = multifold_cover_number(G, tau, node_budget)
        if m is None:
            return None
        val = math.ceil(Fraction(m, tau))
        best = val if best is None else min(best, val)
        if best == floor:
            break
    return best


def mycielskian(G: RelGraph) -> RelGraph:
    n = G.n
    edges = []
    for e in G.edges:
        x, y = tuple(e)
        edges += [(x, y), (x, n + y), (y, n + x)]
    edges += [(n + y, 2 * n) for y in range(n)]
    return RelGraph.from_edges(2 * n + 1, edges)


def mycielski_graph(i: int) -> RelGraph:
    """M_2 = K_2 and M_i = mu(M_{i-1})."""
    G = RelGraph.complete(2)
    for _ in range(i - 2):
        G = mycielskian(G)
    return G


def basicdn_report(G: RelGraph) -> dict:
    """1 <= dd <= cc, and every vertex subset holds a clique of size >= ceil(|S|/dd)."""
    if G.n == 0:
        return {"ok": True, "dd": 0, "cc": 0}
    dd = dd_number(G).value
    cc = cc_number(G).value
    ok = 1 <= dd <= cc
    clique_ok = True
    omega_sub = None
    if G.n <= 12:
        # part (iii) on every subset
        cl = maximal_cliques(G)
        for r in range(1, G.n + 1):
            for S in itertools.combinations(range(G.n), r):
                Sset = set(S)
                big = max(len(Sset.intersection(C)) for C in cl)
                if big < math.ceil(r / dd):
                    clique_ok = False
                    omega_sub = S
                    break
            if not clique_ok:
                break
    return {"ok": ok and clique_ok, "dd": dd, "cc": cc, "chain": ok, "clique_bound": clique_ok,
            "bad_subset": omega_sub, "alpha": independence_number(G)}


# ---------------------------------------------------------------------------
# weak-core decomposition of a pi = 0 fiber

@dataclass
class WeakCore:
    cliques: list  # lists of elements
    X_b: list
    Y: list  # subspaces
    violations: list = field(default_factory=list)
    K: int = 0

    @property
    def C(self):
        return len(self.cliques)

    @property
    def N(self):
        return len(self.Y)


def weak_core_decompose(X, D: int, k: int, s: int | None = None) -> WeakCore:
    from .gamma import related, is_weak_class

    X = sorted(X, key=lambda x: x.sort_key())
    if not X:
        return WeakCore([], [], [], [], 0)
    M = X[0].M
    s = X[0].s if s is None else s
    d = M.d
    if any(any(x.h) for x in X):
        raise ValueError("weak-core decomposition needs a pi = 0 fiber")
    K = s + 2 * k - 1
    out = WeakCore([], [], [], [], K)
    if k >= 2 and d < 2 * (k - 2) * s + 6 * k - 1:
        out.violations.append(f"dimension hypothesis d >= {2 * (k - 2) * s + 6 * k - 1} fails (d={d})")
    if k == 1:
        # ~ is an equivalence relation on Gamma_1: split into classes
        classes = []
        for x in X:
            for c in classes:
                if related(c[0], x):
                    c.append(x)
                    break
            else:
                classes.append([x])
        out.cliques = classes
        if len(classes) > D:
            out.violations.append(f"{len(classes)} classes exceed dd bound {D}")
        return out

    def rec(Xs, Dcur):
        if not Xs:
            return
        weak, _ = is_weak_class(Xs)
        if weak:
            out.cliques.append(list(Xs))
            return
        if Dcur <= 1:
            out.violations.append("a set with dd bound 1 is not a clique")
        chosen = [Xs[0]]
        S = chosen[0].V
        while True:
            B1 = [x for x in Xs if all(related(x, c) for c in chosen)]
            if len(chosen) == K:
                break
            nxt = next((x for x in B1 if x not in chosen and x.V.intersect(S).is_trivial()), None)
            if nxt is None:
                break
            chosen.append(nxt)
            S = S + nxt.V
        B1set = set(id(x) for x in B1)
        B2 = [x for x in Xs if id(x) not in B1set]
        for i, c in enumerate(chosen):
            part = [x for x in B2 if not related(x, c) and all(related(x, c2) for c2 in chosen[:i])]
            rec(part, Dcur - 1)
        if len(chosen) < K:
            out.X_b.extend(B1)
            out.Y.append(S)
        else:
            weak, _ = is_weak_class(B1)
            if weak:
                out.cliques.append(B1)
            else:
                out.violations.append("B1 with K independent directions is not a clique")
                for part in _greedy_cover(RelGraph.from_gamma(B1)):
                    out.cliques.append([B1[i] for i in part])

    rec(X, D)
    return out


def validate_weak_core(X, res: WeakCore, k: int, s: int) -> dict:
    """Independent re-check of a decomposition."""
    from .gamma import related

    keys = sorted(x.sort_key() for x in X)
    got = sorted([x.sort_key() for c in res.cliques for x in c] + [x.sort_key() for x in res.X_b])
    partition_ok = keys == got
    cliques_ok = all(related(a, b) for c in res.cliques for a, b in itertools.combinations(c, 2))
    obstruct_ok = all(any(not x.V.intersect(Y).is_trivial() for Y in res.Y) for x in res.X_b)
    dim_bound = (s + 2 * k - 2) * (k - 1)
    dims_ok = all(Y.dim <= dim_bound for Y in res.Y)
    return {"partition": partition_ok, "cliques": cliques_ok, "obstructions": obstruct_ok,
            "dims": dims_ok, "ok": partition_ok and cliques_ok and obstruct_ok and dims_ok,
            "C": res.C, "N": res.N}


def to_classification(res: WeakCore, k: int, s: int, M):
    """Turn weak-core output into (C0, Y) by the strong/obstruction dichotomy per clique."""
    from .gamma import gwts_check, classify_equivalence
    from .mideal import MIdeal, contains
    from .field_linalg import span
    from .polyring import PrimePoly

    p, d = M.p, M.d
    J = MIdeal(M, Subspace.trivial(p, d))
    C0 = [PrimePoly.zero(p, d)]
    Y = list(res.Y)
    for clique in res.cliques:
        verdict = classify_equivalence(clique)
        if verdict.kind == "strong":
            g = verdict.witness.f
            if not any(contains(J, g - g0) for g0 in C0):
                C0.append(g)
            continue
        rep = gwts_check(clique, k, s=s)
        if rep["branch"] == "obstruction":
            Y.append(span(rep["Y_basis"], p, d) if rep["Y_basis"] else Subspace.trivial(p, d))
        else:
            Y.append(span([b for x in clique for b in x.V.basis], p, d))
    return C0, Y


class InvalidPair(ValueError):
    pass


def classification_check(X, C0, Y, K: int, C: int, D: int, M) -> tuple:
    """Every (0, J_V + f) in X meets Y nontrivially or is related to (0, J^M + g), g in C0."""
    from .mideal import MIdeal, contains

    p, d = M.p, M.d
    J = MIdeal(M, Subspace.trivial(p, d))
    if not any(g.is_zero() for g in C0):
        raise InvalidPair("C0 must contain 0")
    if len(C0) > K + 1:
        raise InvalidPair(f"|C0| = {len(C0)} exceeds K + 1 = {K + 1}")
    for a, b in itertools.combinations(C0, 2):
        if contains(J, a - b):
            raise InvalidPair("two members of C0 agree modulo J^M")
    if len(Y) > C or any(W.dim > D for W in Y):
        raise InvalidPair("Y exceeds its (C, D) shape")
    for x in X:
        if any(not x.V.intersect(W).is_trivial() for W in Y):
            continue
        if any(contains(MIdeal(M, x.V), x.f - g) for g in C0):
            continue
        return False, x
    return True, None


def random_fiber(M, s: int, k: int, rng, classes: int = 3, per_class: int = 3, noise: int = 2) -> list:
    """A pi = 0 fiber in Gamma^s_k: a few strong classes plus unrelated noise elements."""
    from .field_linalg import random_subspace
    from .gamma import GammaElement, random_class_with_witness
    from .polyring import random_homogeneous

    p, d = M.p, M.d
    out = []
    for _ in range(classes):
        g = random_homogeneous(rng, p, d, s)
        Vs = [random_subspace(rng, p, d, k - 1) for _ in range(per_class)]
        out += random_class_with_witness(M, s, (0,) * d, g, Vs, rng)
    for _ in range(noise):
        out.append(GammaElement.make(M, s, (0,) * d, random_subspace(rng, p, d, k - 1),
                                     random_homogeneous(rng, p, d, s)))
    uniq = {x.sort_key(): x for x in out}
    return [uniq[key] for key in sorted(uniq)]
