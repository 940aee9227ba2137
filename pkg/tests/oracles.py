"""Independent brute-force oracles. Plain Python ints, no silab internals."""
import itertools
from fractions import Fraction


def naive_rank(rows, p):
    rows = [[x % p for x in r] for r in rows]
    if not rows:
        return 0
    n = len(rows[0])
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def in_row_span(rows, v, p):
    return naive_rank(list(rows) + [list(v)], p) == naive_rank(rows, p)


def all_points(p, d):
    return list(itertools.product(range(p), repeat=d))


# polynomials as {exponent tuple: coeff} dicts

def pmul(f, g, p):
    out = {}
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = (out.get(e, 0) + c1 * c2) % p
    return {e: c for e, c in out.items() if c}


def padd(f, g, p):
    out = dict(f)
    for e, c in g.items():
        out[e] = (out.get(e, 0) + c) % p
    return {e: c for e, c in out.items() if c}


def peval(f, x, p):
    tot = 0
    for e, c in f.items():
        t = c
        for xi, a in zip(x, e):
            t = t * pow(xi, a, p)
        tot += t
    return tot % p


def monos(d, t):
    return [e for e in itertools.product(range(t + 1), repeat=d) if sum(e) == t]


def quad_dict(A, p):
    """x^T A x for symmetric A, as a dict."""
    d = len(A)
    out = {}
    for i in range(d):
        for j in range(d):
            e = [0] * d
            e[i] += 1
            e[j] += 1
            e = tuple(e)
            out[e] = (out.get(e, 0) + A[i][j]) % p
    return {e: c for e, c in out.items() if c}


def linear_form_dict(A, h, p):
    """x -> 2 (hA).x, the derivative of x^T A x in direction h."""
    d = len(A)
    out = {}
    for j in range(d):
        c = 2 * sum(h[i] * A[i][j] for i in range(d)) % p
        if c:
            e = [0] * d
            e[j] = 1
            out[tuple(e)] = c
    return out


def ideal_piece_rows(A, hs, p, t):
    """Spanning rows (coefficient vectors on monos(d, t)) of the degree-t part of (Q, L_h : h in hs)."""
    d = len(A)
    basis = monos(d, t)
    idx = {e: i for i, e in enumerate(basis)}
    gens = []
    if t >= 2:
        gens.append((quad_dict(A, p), 2))
    for h in hs:
        gens.append((linear_form_dict(A, h, p), 1))
    rows = []
    for g, deg in gens:
        for m in monos(d, t - deg):
            prod = pmul(g, {m: 1}, p)
            row = [0] * len(basis)
            for e, c in prod.items():
                row[idx[e]] = c
            rows.append(row)
    return rows, basis


def member(A, hs, f, p):
    """f (dict) lies in the ideal generated by Q and the L_h, checked degree by degree."""
    by_deg = {}
    for e, c in f.items():
        by_deg.setdefault(sum(e), {})[e] = c
    for t, comp in by_deg.items():
        rows, basis = ideal_piece_rows(A, hs, p, t)
        v = [comp.get(e, 0) for e in basis]
        if not rows or not in_row_span(rows, v, p):
            if any(v):
                return False
    return True


def dd_by_enumeration(n, edges, max_right=6):
    """Density dependence by searching over all right multisets of cliques up to a size."""
    adj = {(a, b) for a, b in edges} | {(b, a) for a, b in edges}
    cliques = [frozenset(c) for r in range(1, n + 1) for c in itertools.combinations(range(n), r)
               if all((a, b) in adj for a, b in itertools.combinations(c, 2))]
    best = None
    for m in range(1, max_right + 1):
        for multi in itertools.combinations_with_replacement(cliques, m):
            cov = min(sum(v in C for C in multi) for v in range(n))
            if cov:
                t = Fraction(cov, m)
                if best is None or t > best:
                    best = t
    return best


def min_clique_partition(n, edges):
    adj = {(a, b) for a, b in edges} | {(b, a) for a, b in edges}
    for k in range(1, n + 1):
        for labels in itertools.product(range(k), repeat=n):
            if labels and labels[0] != 0:
                continue
            ok = all((a, b) in adj for a, b in itertools.combinations(range(n), 2) if labels[a] == labels[b])
            if ok:
                return k
    return 0
