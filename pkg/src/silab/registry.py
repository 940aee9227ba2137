"""Lemma id -> seeded verification job.

Every job takes an ExperimentConfig and returns a JobResult whose content
depends only on the config (and its seed). Descriptions are paraphrases.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from . import field_linalg as fl
from . import freiman as fr
from . import gamma as gm
from . import mideal as mi
from . import quadform as qf
from . import relgraph as rg
from . import structure as st
from .field_linalg import Subspace, is_prime, random_independent, random_subspace, random_vector, span
from .polyring import PrimePoly, random_homogeneous, random_poly, variety
from .quadform import QuadForm


class ConfigError(ValueError):
    pass


RANGES = {
    "p": (3, 10007), "d": (1, 16), "s": (0, 4), "k": (1, 6), "N": (1, 16),
    "trials": (1, 100000), "seed": (0, 2 ** 32 - 1), "budget": (1, 10 ** 9),
}


@dataclass(frozen=True)
class ExperimentConfig:
    lemma: str
    p: int | None = None
    d: int | None = None
    s: int | None = None
    k: int | None = None
    N: int | None = None
    trials: int | None = None
    seed: int = 0
    budget: int | None = None

    def validate(self) -> "ExperimentConfig":
        if self.lemma not in REGISTRY:
            raise ConfigError(f"unknown lemma id {self.lemma!r}")
        for name, (lo, hi) in RANGES.items():
            v = getattr(self, name)
            if v is None:
                continue
            if not isinstance(v, int) or not lo <= v <= hi:
                raise ConfigError(f"{name}={v!r} outside [{lo}, {hi}]")
        if self.p is not None and (self.p % 2 == 0 or not is_prime(self.p)):
            raise ConfigError(f"p={self.p} must be an odd prime")
        return self

    def resolved(self, profile: str = "fast") -> "ExperimentConfig":
        """Fill unset parameters from the job's defaults for the profile."""
        job_spec = REGISTRY[self.lemma]
        base = dict(job_spec.defaults.get(profile, job_spec.defaults["fast"]))
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        for key, v in base.items():
            if vals.get(key) is None:
                vals[key] = v
        return ExperimentConfig(**vals)

    def to_json(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class JobResult:
    outcome: str  # pass | fail | hypothesis-not-met
    hypotheses: dict = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)
    observed: dict = field(default_factory=dict)
    table: list = field(default_factory=list)


@dataclass(frozen=True)
class JobSpec:
    lemma: str
    anchor: str
    summary: str
    run: object
    defaults: dict


REGISTRY: dict = {}


def job(lemma, anchor, summary, fast, full=None):
    def deco(fn):
        REGISTRY[lemma] = JobSpec(lemma, anchor, summary, fn, {"fast": fast, "full": full or fast})
        return fn
    return deco


def _verdict(failures, hypotheses_met=True):
    if failures:
        return "fail"
    return "pass" if hypotheses_met else "hypothesis-not-met"


def _rng(cfg):
    return np.random.default_rng(cfg.seed)


def _sq(p, d):
    return QuadForm.sum_of_squares(p, d)


def _budget(cfg, default=10 ** 8):
    return cfg.budget if cfg.budget is not None else default


def _frac(x):
    return str(Fraction(x))


# ---------------------------------------------------------------------------
# arithmetic constants

@job("thisisns", "N(s)", "The dimension threshold (2s+16)(15s+453) at s = 0 and s = 1.",
     {"s": 1})
def _thisisns(cfg):
    table = [{"s": s, "N": fr.N(s)} for s in range(cfg.s + 1)]
    bad = [r for r in table if r["s"] == 0 and r["N"] != 7248 or r["s"] == 1 and r["N"] != 8424]
    return JobResult(_verdict(len(bad)), {}, bad, {"N0": fr.N(0), "N1": fr.N(1)}, table)


# ---------------------------------------------------------------------------
# counting

def _counting01_rows(ps, ds, budget=10 ** 8):
    rows = []
    for p in ps:
        for d in ds:
            M = _sq(p, d)
            rep = qf.count_variety_affine(M, Subspace.full(p, d), budget=budget)
            dev = rep.count - rep.main_term
            rows.append({"p": p, "d": d, "r": 0, "exact": rep.count, "main_term": rep.main_term,
                         "normalized_deviation": str(rep.deviation),
                         "within": dev * dev <= p ** d})
    return rows


@job("counting01", "counting01", "Exact quadric point counts on affine subspaces against the main term.",
     {"p": 7, "d": 5, "trials": 3}, {"p": 13, "d": 5, "trials": 10})
def _counting01(cfg):
    ps = [q for q in (5, 7, 11, 13) if q <= cfg.p]
    rows = _counting01_rows(ps, [d for d in (3, 4, 5) if d <= cfg.d], _budget(cfg))
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    M = _sq(p, d)
    worst = Fraction(0)
    for _ in range(cfg.trials):
        V = random_subspace(rng, p, d, d - 1)
        c = random_vector(rng, p, d)
        rep = qf.count_variety_affine(M, V, c, budget=_budget(cfg))
        row = {"p": p, "d": d, "r": 1, "exact": rep.count, "main_term": rep.main_term,
               "normalized_deviation": str(rep.deviation), "rank": rep.rank}
        if rep.rank >= 3:
            # observed constant in |dev| <= K p^{-(rank-2)/2}
            K = abs(rep.deviation) ** 2 * p ** (rep.rank - 2)
            worst = max(worst, K)
            row["within"] = K <= 4
        rows.append(row)
    bad = [r for r in rows if r.get("within") is False]
    return JobResult(_verdict(len(bad)), {}, bad, {"max_K_squared": str(worst)}, rows)


@job("counting02", "counting02", "Exact counts of common zeros of M and its shifts against p^(d-r-1).",
     {"p": 7, "d": 5, "trials": 2}, {"p": 13, "d": 5, "trials": 4})
def _counting02(cfg):
    rng = _rng(cfg)
    rows, bad = [], []
    for p in [q for q in (5, 7, 11, 13) if q <= cfg.p]:
        for d in [x for x in (3, 4, 5, 6, 7) if x <= cfg.d]:
            M = _sq(p, d)
            for r in (1, 2):
                if d - 2 * r < 3:
                    continue
                for _ in range(cfg.trials):
                    hs = random_independent(rng, p, d, r)
                    rep = qf.count_common_variety(M, hs, budget=_budget(cfg))
                    main = rep.main_term
                    dev = rep.count - main
                    ok = dev * dev * p <= 4 * main * main
                    row = {"p": p, "d": d, "r": r, "exact": rep.count, "main_term": main,
                           "normalized_deviation": str(rep.deviation), "within": ok}
                    rows.append(row)
                    if not ok:
                        bad.append(row)
    return JobResult(_verdict(len(bad)), {}, bad, {"rows": len(rows)}, rows)


# ---------------------------------------------------------------------------
# quadratic-form lemmas

def _param_rank(M, V, c):
    """Rank of the quadratic part of t -> M(tB + c), read off the composed polynomial."""
    if V.is_trivial():
        return 0
    g = M.as_poly().substitute_linear(V.matrix(), c)
    k, p = V.dim, M.p
    A = np.zeros((k, k), dtype=np.int64)
    half = pow(2, -1, p)
    for e, coef in g.terms:
        if sum(e) != 2:
            continue
        idx = [i for i, a in enumerate(e) for _ in range(a)]
        i, j = idx
        if i == j:
            A[i, i] = coef
        else:
            A[i, j] = A[j, i] = coef * half % p
    return fl.rank(A, p)


@job("iissoo", "iissoo", "Isotropy dimension, restricted rank formula and its bounds on random subspaces.",
     {"p": 7, "d": 5, "trials": 40}, {"p": 7, "d": 6, "trials": 200})
def _iissoo(cfg):
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    bad = []
    for t in range(cfg.trials):
        A = rng.integers(0, p, size=(d, d))
        A = (A + A.T) % p
        if t % 2 == 0:
            M = QuadForm.random_nondegenerate(rng, p, d)
        else:
            M = QuadForm(p, tuple(tuple(int(x) for x in row) for row in A))
        r = int(rng.integers(0, d))
        V = random_subspace(rng, p, d, d - r)
        c = random_vector(rng, p, d)
        iso = V.intersect(qf.perp(M, V)).dim
        rk = qf.restricted_rank(M, V, c)
        rkM = qf.rank(M)
        checks = {
            "i": iso <= min(d - rkM + r, d - r),
            "ii": rk == (d - r) - iso == _param_rank(M, V, c),
            "iii": rkM - 2 * r <= rk <= d - r,
            "iv": (rk == d - r) == (iso == 0),
        }
        if not all(checks.values()):
            bad.append({"trial": t, **checks})
    return JobResult(_verdict(len(bad)), {}, bad, {"trials": cfg.trials})


@job("cbn", "cbn", "Rank of M on the perp of V + V' drops by at most 2 dim V'.",
     {"p": 7, "d": 6, "trials": 40}, {"p": 11, "d": 7, "trials": 200})
def _cbn(cfg):
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    bad, met = [], 0
    for t in range(cfg.trials):
        M = QuadForm.random_nondegenerate(rng, p, d)
        r = int(rng.integers(0, d // 2 + 1))
        r2 = int(rng.integers(0, d - r + 1))
        V = random_subspace(rng, p, d, r)
        V2 = random_subspace(rng, p, d, r2)
        if qf.restricted_rank(M, qf.perp(M, V)) != d - r:
            continue
        met += 1
        lhs = qf.restricted_rank(M, qf.perp(M, V + V2))
        if lhs < d - r - 2 * r2:
            bad.append({"trial": t, "rank": lhs, "bound": d - r - 2 * r2})
    return JobResult(_verdict(len(bad), met > 0), {"instances_meeting_hypothesis": met}, bad)


@job("iiddpp", "iiddpp", "Counts of dependent and of isotropic k-tuples.",
     {"p": 5, "d": 2, "k": 2, "trials": 300}, {"p": 5, "d": 3, "k": 2, "trials": 2000})
def _iiddpp(cfg):
    p, d, k = cfg.p, cfg.d, cfg.k
    pts = [tuple(int(x) for x in r) for r in fl.grid_points(p, d)]
    if len(pts) ** k > 10 ** 6:
        raise ConfigError("exact tuple enumeration exceeds 10^6 tuples")
    dep = sum(1 for tup in itertools.product(pts, repeat=k) if not fl.is_independent_tuple(list(tup), p, d))
    bound = k * p ** ((d + 1) * (k - 1))
    M = _sq(p, d)
    frac1, exact1 = qf.isotropic_tuple_fraction(M, 1)
    direct = Fraction(sum(1 for h in pts if M.bilinear(h, h) == 0), p ** d)
    rows = []
    rng = _rng(cfg)
    for q in (5, 7, 11):
        frac, exact = qf.isotropic_tuple_fraction(_sq(q, 4), 2, sample=cfg.trials, rng=rng, budget=0)
        rows.append({"p": q, "d": 4, "k": 2, "fraction": str(frac), "C_observed": str(frac * q)})
    bad = []
    if dep > bound:
        bad.append({"dependent": dep, "bound": bound})
    if frac1 != direct:
        bad.append({"isotropic_1_tuples": str(frac1), "direct": str(direct)})
    return JobResult(_verdict(len(bad)), {}, bad, {"dependent": dep, "bound": bound}, rows)


@job("ns", "ns", "A nonzero polynomial of degree r vanishes on at most r p^(d-1) points.",
     {"p": 7, "d": 3, "s": 3, "trials": 30}, {"p": 11, "d": 4, "s": 3, "trials": 100})
def _ns(cfg):
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    bad, worst = [], Fraction(0)
    for _ in range(cfg.trials):
        P = random_poly(rng, p, d, cfg.s, density=0.4)
        if P.is_zero():
            continue
        deg = P.degree()
        z = len(variety(P, budget=_budget(cfg)))
        worst = max(worst, Fraction(z, p ** (d - 1)))
        if deg < p and z > deg * p ** (d - 1):
            bad.append({"poly": P.to_text(), "zeros": z})
    return JobResult(_verdict(len(bad)), {}, bad, {"max_zeros_over_p^(d-1)": str(worst)})


# ---------------------------------------------------------------------------
# ideal membership and intersection properties

def _petals(rng, p, d, dims, modulo=None):
    vs = random_independent(rng, p, d, sum(dims), modulo=modulo)
    out, i = [], 0
    for r in dims:
        out.append(span(vs[i:i + r], p, d))
        i += r
    return out


@job("gr-1", "gr-1", "Independent petals: N >= dim V + 2 forces the intersection of V + V_i down to V.",
     {"p": 5, "d": 8, "trials": 60}, {"p": 5, "d": 8, "trials": 200})
def _gr1(cfg):
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    bad, broken = [], 0
    for t in range(cfg.trials):
        m = int(rng.integers(0, min(3, d - 2) + 1))
        N = m + 2
        dims = [1] * N
        extra = d - N
        for i in range(N):
            if extra > 0 and rng.random() < 0.3:
                dims[i] += 1
                extra -= 1
        V = random_subspace(rng, p, d, m)
        Vs = _petals(rng, p, d, dims)
        if not mi.verify_intersection_subspaces(V, Vs):
            bad.append({"trial": t, "V": [list(b) for b in V.basis]})
        # one petal short, all petals through a common vector outside V
        if m + 1 <= d - 1 and m >= 1:
            c = None
            while c is None or V.contains(c):
                c = random_vector(rng, p, d)
            vs = V.points()
            pet = []
            for _ in range(m + 1):
                v = vs[int(rng.integers(0, len(vs)))]
                pet.append(span([tuple(int(x) for x in (np.array(c) + v) % p)], p, d))
            if fl.is_independent_tuple(pet, p, d) and not mi.verify_intersection_subspaces(V, pet):
                broken += 1
    return JobResult(_verdict(len(bad)), {}, bad, {"counterexamples_when_violated": broken})


@job("gr0/gri", "gr0", "Ideal intersection property for independent petals, compared degree by degree.",
     {"p": 11, "d": 7, "s": 1, "trials": 30}, {"p": 11, "d": 7, "s": 1, "trials": 200})
def _gr0(cfg):
    rng = _rng(cfg)
    p, d, s = cfg.p, cfg.d, cfg.s
    bad, met, broken = [], 0, 0
    for t in range(cfg.trials):
        M = _sq(p, d) if t % 2 == 0 else QuadForm.random_nondegenerate(rng, p, d)
        N = s + 1
        Vs = _petals(rng, p, d, [1] * N)
        f = random_homogeneous(rng, p, d, s)
        rep = mi.verify_intersection_ideals(M, Subspace.trivial(p, d), Vs, f, s)
        if rep["hypotheses"]["holds"]:
            met += 1
            if rep["outcome"] == "fail":
                bad.append({"trial": t, "counterexample": rep["counterexample"]})
        # repeated petal: independence broken on purpose
        W = Vs[0]
        g = mi.random_member(mi.MIdeal(M, W), s, rng)
        rep2 = mi.verify_intersection_ideals(M, Subspace.trivial(p, d), [W, W], g, s)
        if not rep2["biconditional"]:
            broken += 1
    return JobResult(_verdict(len(bad), met > 0), {"instances_meeting_hypothesis": met}, bad,
                     {"counterexamples_when_violated": broken})


@job("grm", "grm", "Membership for every tuple from a dense set forces membership in J_V.",
     {"p": 7, "d": 7, "trials": 6}, {"p": 7, "d": 7, "trials": 20})
def _grm(cfg):
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    M = _sq(p, d)
    P = [tuple(int(x) for x in r) for r in fl.grid_points(p, d)]
    bad, witnesses = [], 0
    for t in range(cfg.trials):
        V = random_subspace(rng, p, d, int(rng.integers(0, 2)))
        f = mi.random_member(mi.MIdeal(M, V), 2, rng)
        rep = mi.verify_grm(M, V, [], P, f, 1, rng=rng, samples=20)
        if rep["outcome"] == "fail":
            bad.append({"trial": t})
        g = mi.random_nonmember(mi.MIdeal(M, V), 2, rng)
        rep2 = mi.verify_grm(M, V, [], P, g, 1, rng=rng, samples=20)
        if rep2["outcome"] == "fail":
            bad.append({"trial": t, "nonmember": g.to_text()})
        witnesses += rep2["outcome"] == "hypothesis-not-met"
    return JobResult(_verdict(len(bad)), {}, bad, {"nonmember_witnesses": witnesses})


def _mult_kernel(M, h, hs, t):
    """{f in HP(t) : L_h f in J_hs}, against the degree-t piece of J_hs."""
    p, d = M.p, M.d
    W = span(hs, p, d) if hs else Subspace.trivial(p, d)
    T = gm.normal_form_matrix(M, W, t + 1)
    Lh = M.linear_form(h)
    mons = mi.monomials(d, t)
    rows = np.array([(Lh * PrimePoly.monomial(e, 1, p, d)).coeff_vector(t + 1) for e in mons], dtype=np.int64)
    img = fl.matmul_mod(rows, T, p)
    K = fl.kernel(img.T, p)
    piece = mi.graded_piece(M, W, t).subspace(p, len(mons))
    return K, piece


@job("killL", "killL", "Multiplying by a linear form outside the span cannot create membership.",
     {"p": 7, "d": 7, "s": 2, "trials": 10}, {"p": 11, "d": 7, "s": 2, "trials": 100})
def _killL(cfg):
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    bad, met = [], 0
    for t in range(cfg.trials):
        M = QuadForm.random_nondegenerate(rng, p, d)
        k = int(rng.integers(0, (d - 5) // 2 + 1))
        vs = random_independent(rng, p, d, k + 1)
        h, hs = vs[0], vs[1:]
        rep = mi.killL_check(M, h, hs, random_homogeneous(rng, p, d, cfg.s))
        if not rep["ok"]:
            bad.append({"trial": t})
        if rep["regime"]:
            met += 1
            K, piece = _mult_kernel(M, h, hs, cfg.s)
            if K != piece:
                bad.append({"trial": t, "kernel_dim": K.dim, "piece_dim": piece.dim})
    return JobResult(_verdict(len(bad), met > 0), {"instances_in_regime": met}, bad)


@job("w3s-roundtrip", "w3s", "Elements of the petal intersection have the product-shape decomposition.",
     {"p": 7, "d": 7, "s": 2, "trials": 4}, {"p": 11, "d": 7, "s": 2, "trials": 12})
def _w3s(cfg):
    rng = _rng(cfg)
    p, d, s = cfg.p, cfg.d, cfg.s
    bad, met = [], 0
    for t in range(cfg.trials):
        M = QuadForm.random_nondegenerate(rng, p, d)
        N = int(rng.integers(1, s + 2))
        Vs = _petals(rng, p, d, [1] * N)
        hyp = mi.gr0_hypotheses(M, Subspace.trivial(p, d), Vs, s, weak=True)
        if not (hyp["nondegenerate"] and hyp["rank_or_dimension"] and hyp["all_independent"]):
            continue
        met += 1
        rep = mi.w3s_roundtrip(M, Subspace.trivial(p, d), Vs, s, rng)
        if not rep["equal"] or rep["fails"]:
            bad.append({"trial": t, **rep})
    return JobResult(_verdict(len(bad), met > 0), {"instances_meeting_hypothesis": met}, bad)


@job("noloop3", "noloop3", "Span membership agrees with vanishing on the common variety, with certificates.",
     {"p": 7, "d": 5, "s": 2, "trials": 20}, {"p": 11, "d": 5, "s": 3, "trials": 100})
def _noloop3(cfg):
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    M = _sq(p, d)
    bad, regime, certs = [], 0, 0
    for t in range(cfg.trials):
        V = random_subspace(rng, p, d, int(rng.integers(0, 2)))
        I = mi.MIdeal(M, V)
        s = int(rng.integers(1, cfg.s + 1))
        f = mi.random_member(I, s, rng) if t % 2 == 0 else random_homogeneous(rng, p, d, s)
        a = mi.contains(I, f)
        if a and not f.is_zero():
            cert = mi.decompose(I, f)
            certs += cert is not None
        if mi.noloop_regime(I):
            regime += 1
            b = mi.vanishing_contains(I, f)
            if a != b:
                bad.append({"trial": t, "span": a, "vanishing": b, "f": f.to_text()})
        # affine difference form
        hs = list(V.basis)
        g = M.as_poly() * random_poly(rng, p, d, s - 2 if s >= 2 else 0, 0.5) if s >= 2 else PrimePoly.zero(p, d)
        for h in hs:
            g = g + M.difference_form(h) * random_poly(rng, p, d, max(s - 1, 0), 0.5)
        if mi.difference_decompose(M, hs, g, max(g.degree(), s)) is None:
            bad.append({"trial": t, "difference_member_rejected": g.to_text()})
    return JobResult(_verdict(len(bad), regime > 0), {"instances_in_regime": regime}, bad,
                     {"certificates": certs})


# ---------------------------------------------------------------------------
# Gamma-level lemmas

def _nott_triplet(p, d):
    M = _sq(p, d)
    z = (0,) * d
    e = [fl.unit(i, d) for i in range(3)]
    x1 = gm.GammaElement.make(M, 1, z, span([e[0]], p, d), PrimePoly.var(1, p, d))
    x2 = gm.GammaElement.make(M, 1, z, span([e[1]], p, d))
    x3 = gm.GammaElement.make(M, 1, z, span([e[2]], p, d))
    return x1, x2, x3


@job("nott", "nott", "Relatedness is not transitive: two related pairs whose ends are unrelated.",
     {"p": 11, "d": 7})
def _nott(cfg):
    x1, x2, x3 = _nott_triplet(cfg.p, cfg.d)
    got = (gm.related(x1, x2), gm.related(x2, x3), gm.related(x1, x3))
    exp = (True, True, False)
    bad = [] if got == exp else [{"got": list(got), "expected": list(exp)}]
    return JobResult(_verdict(len(bad)), {}, bad, {"verdicts": list(got)})


def _random_element(rng, M, s, k, h=None):
    p, d = M.p, M.d
    if h is None:
        h = random_vector(rng, p, d) if rng.random() < 0.7 else (0,) * d
    dim = k if any(h) else k - 1
    dim = int(rng.integers(1 if any(h) else 0, dim + 1))
    if any(h):
        rest = random_independent(rng, p, d, dim - 1, modulo=span([h], p, d)) if dim > 1 else []
        V = span([h] + rest, p, d)
    else:
        V = random_subspace(rng, p, d, dim)
    return gm.GammaElement.make(M, s, h, V, random_homogeneous(rng, p, d, s))


@job("a+b", "a+b", "Levels add under the hat sum; compatibility of the relation with sums.",
     {"p": 7, "d": 6, "s": 1, "trials": 40}, {"p": 7, "d": 8, "s": 2, "trials": 200})
def _aplusb(cfg):
    rng = _rng(cfg)
    p, d, s = cfg.p, cfg.d, cfg.s
    M = _sq(p, d)
    bad = []
    for t in range(cfg.trials):
        k1, k2 = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        a, b = _random_element(rng, M, s, k1), _random_element(rng, M, s, k2)
        if t % 5 == 0:
            b = gm.GammaElement.make(M, s, fl.vscale(p - 1, a.h, p), a.V, random_homogeneous(rng, p, d, s))
            k2 = k1
        c = gm.hat_add(a, b)
        ok = c.in_gamma_k(k1 + k2) and c.h == fl.vadd(a.h, b.h, p) and c.V == a.V + b.V
        # compatibility: x ~ y and x' ~ y' give x + x' ~ y + y'
        y = gm.GammaElement.make(M, s, a.h, a.V, a.f + mi.random_member(mi.MIdeal(M, a.V), s, rng))
        y2 = gm.GammaElement.make(M, s, b.h, b.V, b.f + mi.random_member(mi.MIdeal(M, b.V), s, rng))
        ok = ok and gm.related(a, y) and gm.related(gm.hat_add(a, b), gm.hat_add(y, y2))
        if not ok:
            bad.append({"trial": t})
    return JobResult(_verdict(len(bad)), {}, bad)


@job("spsp1", "spsp1", "Two elements related to a common level-one element are related.",
     {"p": 7, "d": 6, "s": 1, "trials": 40}, {"p": 11, "d": 7, "s": 2, "trials": 200})
def _spsp1(cfg):
    rng = _rng(cfg)
    p, d, s = cfg.p, cfg.d, cfg.s
    M = _sq(p, d)
    bad = []
    for t in range(cfg.trials):
        u = random_vector(rng, p, d) if t % 3 else (0,) * d
        g = random_homogeneous(rng, p, d, s)
        y = gm.lift(M, s, u, g)
        xs = []
        for _ in range(2):
            extra = random_subspace(rng, p, d, int(rng.integers(0, 3)))
            V = span([u], p, d) + extra
            xs.append(gm.GammaElement.make(M, s, u, V, g + mi.random_member(mi.MIdeal(M, V), s, rng)))
        if not (gm.related(xs[0], y) and gm.related(xs[1], y) and gm.related(xs[0], xs[1])):
            bad.append({"trial": t})
    # the middle element of the non-transitive triple has level two, so the lemma does not apply
    x1, x2, x3 = _nott_triplet(11, 7)
    return JobResult(_verdict(len(bad)), {}, bad,
                     {"nott_middle_level": x2.level(), "nott_ends_related": gm.related(x1, x3)})


def _exws(p=11, d=7):
    M = _sq(p, d)
    z = (0,) * d
    e1, e2 = fl.unit(0, d), fl.unit(1, d)
    x1 = gm.GammaElement.make(M, 1, z, span([e1], p, d))
    x2 = gm.GammaElement.make(M, 1, z, span([e2], p, d))
    x3 = gm.GammaElement.make(M, 1, z, span([fl.vadd(e1, e2, p)], p, d), PrimePoly.var(0, p, d))
    x4 = gm.GammaElement.make(M, 1, z, span([fl.vsub(e1, e2, p)], p, d))
    return M, [x1, x2, x3], [x1, x2, x4]


@job("gwts", "gwts", "A weak class is strong or all its subspaces meet a small obstruction subspace.",
     {"p": 7, "d": 11, "s": 1, "k": 2, "trials": 10}, {"p": 7, "d": 11, "s": 1, "k": 2, "trials": 50})
def _gwts(cfg):
    rng = _rng(cfg)
    p, d, s, k = cfg.p, cfg.d, cfg.s, cfg.k
    bad = []
    M, ex1, ex2 = _exws()
    r1, r2 = gm.gwts_check(ex1, 2, s=1), gm.gwts_check(ex2, 2, s=1)
    v1, v2 = gm.classify_equivalence(ex1), gm.classify_equivalence(ex2)
    if not (v1.kind == "weak" and r1["branch"] == "obstruction" and r1["consistent"]):
        bad.append({"example": "exws1", "class": v1.kind, "branch": r1["branch"]})
    if v2.kind != "strong":
        bad.append({"example": "exws2", "class": v2.kind})
    M = _sq(p, d)
    strong = 0
    for t in range(cfg.trials):
        g = random_homogeneous(rng, p, d, s)
        Vs = [random_subspace(rng, p, d, k - 1) for _ in range(s + k + 2)]
        X = gm.random_class_with_witness(M, s, (0,) * d, g, Vs, rng)
        rep = gm.gwts_check(X, k, s=s)
        if not rep["consistent"]:
            bad.append({"trial": t, "branch": rep["branch"]})
        strong += rep["branch"] == "strong"
    return JobResult(_verdict(len(bad)), {}, bad, {"strong_branch": strong, "trials": cfg.trials, "exws2_branch": r2["branch"],
                                                   "exws1_Y": r1.get("Y_basis")})


@job("gweakdic", "gweakdic", "Greedy search: independent members modulo U, or a subspace meeting all.",
     {"p": 7, "d": 8, "trials": 30}, {"p": 7, "d": 10, "trials": 200})
def _gweakdic(cfg):
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    bad, branches = [], {"independent": 0, "obstruction": 0}
    for t in range(cfg.trials):
        U = random_subspace(rng, p, d, int(rng.integers(0, 2)))
        if t % 2:
            W = U + random_subspace(rng, p, d, 2)
            spaces = [U + span([random_vector(rng, p, d)], p, d) + span([W.points()[int(rng.integers(1, W.size()))]], p, d)
                      for _ in range(4)]
        else:
            spaces = [U + random_subspace(rng, p, d, 1) for _ in range(4)]
        m = 3
        res = gm.gweakdic(spaces, m, U)
        if res.independent is not None:
            branches["independent"] += 1
            ok = fl.is_independent_tuple([spaces[i] for i in res.independent], p, d, modulo=U)
        else:
            branches["obstruction"] += 1
            ok = all(V.intersect(res.W).dim > U.intersect(V).dim or not V.intersect(res.W).is_trivial()
                     for V in spaces) and res.W.dim <= U.dim + (m - 1) * max(V.dim for V in spaces)
        if not ok:
            bad.append({"trial": t})
    return JobResult(_verdict(len(bad)), {}, bad, branches)


@job("energy-def", "energy", "M-energy from the graph construction equals the quadruple-loop count.",
     {"p": 7, "d": 5, "s": 1, "trials": 2}, {"p": 7, "d": 5, "s": 1, "trials": 6})
def _energy(cfg):
    rng = _rng(cfg)
    p, d, s = cfg.p, cfg.d, cfg.s
    M = _sq(p, d)
    bad, rows = [], []
    for t in range(cfg.trials):
        H = [random_vector(rng, p, d) for _ in range(5)]
        H.append(fl.vsub(fl.vadd(H[0], H[1], p), H[2], p))
        xi = {h: random_homogeneous(rng, p, d, s) for h in H}
        zero = {h: PrimePoly.zero(p, d) for h in H}
        e = gm.m_energy(xi, H, M, s, budget=_budget(cfg, 10 ** 6)).energy
        n = gm.m_energy_naive(xi, H, M, s)
        e0 = gm.m_energy(zero, H, M, s).energy
        quads = sum(1 for a, b, c, dd in itertools.product(H, repeat=4) if fl.vsub(a, b, p) == fl.vsub(c, dd, p))
        rows.append({"energy": e, "naive": n, "zero_energy": e0, "quadruples": quads})
        if e != n or e0 != quads:
            bad.append({"trial": t, "energy": e, "naive": n})
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


# ---------------------------------------------------------------------------
# relation graphs

def _random_graph(rng, n, q):
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < q]
    return rg.RelGraph.from_edges(n, edges)


@job("basicdn", "basicdn", "1 <= dd <= cc, and every vertex subset holds a clique of size |S|/dd.",
     {"trials": 30, "N": 8}, {"trials": 150, "N": 10})
def _basicdn(cfg):
    rng = _rng(cfg)
    bad = []
    for t in range(cfg.trials):
        G = _random_graph(rng, int(rng.integers(1, cfg.N + 1)), float(rng.random()))
        rep = rg.basicdn_report(G)
        sub = G.induced(range(G.n // 2 + 1))
        mono = rg.dd_number(sub).value <= rep["dd"] and rg.cc_number(sub).value <= rep["cc"]
        one = (rep["dd"] == 1) == (rep["cc"] == 1)
        if not (rep["ok"] and mono and one):
            bad.append({"trial": t, "edges": G.to_edge_list()})
    return JobResult(_verdict(len(bad)), {}, bad, {"graphs": cfg.trials})


@job("duplicate", "duplicate", "Replicating the right side keeps an auxiliary graph and its density.",
     {"trials": 20, "N": 8}, {"trials": 100, "N": 10})
def _duplicate(cfg):
    rng = _rng(cfg)
    bad = []
    for t in range(cfg.trials):
        G = _random_graph(rng, int(rng.integers(2, cfg.N + 1)), float(rng.random()))
        aux = rg.dd_certificate(G)
        m = int(rng.integers(1, 4))
        big = aux.duplicate(m)
        if not (big.is_auxiliary(G) and big.density() == aux.density() and len(big.right) == m * len(aux.right)):
            bad.append({"trial": t})
    return JobResult(_verdict(len(bad)), {}, bad)


@job("lonely", "lonely", "Adding a vertex unrelated to everything raises dd by exactly one.",
     {"trials": 20, "N": 9}, {"trials": 50, "N": 11})
def _lonely(cfg):
    rng = _rng(cfg)
    bad, rows = [], []
    for t in range(cfg.trials):
        G = _random_graph(rng, int(rng.integers(1, cfg.N + 1)), float(rng.random()))
        a, b = rg.dd_number(G).value, rg.dd_number(G.add_isolated()).value
        rows.append({"n": G.n, "dd": a, "dd_plus": b})
        if b != a + 1:
            bad.append({"trial": t, "edges": G.to_edge_list()})
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


@job("exex001", "exex001", "Mycielski graphs: clique cover against density dependence.",
     {"k": 4}, {"k": 5})
def _exex001(cfg):
    rows, bad = [], []
    for i in range(3, cfg.k + 1):
        G = rg.mycielski_graph(i)
        H = G.complement()
        dd, cc = rg.dd_number(G), rg.cc_number(G)
        row = {"i": i, "n": G.n, "cc": cc.value, "dd": dd.value, "fractional": str(dd.fractional),
               "alpha": rg.independence_number(G), "triangle_free": G.is_triangle_free(),
               "cc_lower_bound": 3 * 2 ** (i - 3), "complement_cc": rg.cc_number(H).value,
               "complement_dd": rg.dd_number(H).value}
        row["cc_bound_holds"] = cc.value >= 3 * 2 ** (i - 3)
        row["dd_le_i"] = dd.value <= i
        row["complement_dd_le_i"] = row["complement_dd"] <= i
        rows.append(row)
        if not (row["cc_bound_holds"] and row["dd_le_i"]):
            bad.append({"i": i, "cc": cc.value, "dd": dd.value,
                        "reason": "triangle-free graphs have only edge cliques, so dd >= n/2"})
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


def _fiber(cfg, rng):
    M = QuadForm.random_nondegenerate(rng, cfg.p, cfg.d)
    return M, rg.random_fiber(M, cfg.s, cfg.k, rng)


@job("gweakcore1", "gweakcore1", "Weak-core decomposition of a pi = 0 fiber, re-validated independently.",
     {"p": 7, "d": 11, "s": 1, "k": 2, "trials": 5}, {"p": 7, "d": 11, "s": 1, "k": 2, "trials": 50})
def _gweakcore1(cfg):
    rng = _rng(cfg)
    bad, rows = [], []
    for t in range(cfg.trials):
        M, X = _fiber(cfg, rng)
        D = rg.dd_number(rg.RelGraph.from_gamma(X)).value
        res = rg.weak_core_decompose(X, D, cfg.k, cfg.s)
        v = rg.validate_weak_core(X, res, cfg.k, cfg.s)
        rows.append({"size": len(X), "dd": D, "C": res.C, "N": res.N, "X_b": len(res.X_b)})
        if not v["ok"]:
            bad.append({"trial": t, **{k: v[k] for k in ("partition", "cliques", "obstructions", "dims")}})
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


@job("gweakcore2", "gweakcore2", "The decomposition turns into a valid structure-obstacle classification.",
     {"p": 7, "d": 11, "s": 1, "k": 2, "trials": 5}, {"p": 7, "d": 11, "s": 1, "k": 2, "trials": 50})
def _gweakcore2(cfg):
    rng = _rng(cfg)
    bad, rows = [], []
    for t in range(cfg.trials):
        M, X = _fiber(cfg, rng)
        D = rg.dd_number(rg.RelGraph.from_gamma(X)).value
        res = rg.weak_core_decompose(X, D, cfg.k, cfg.s)
        C0, Y = rg.to_classification(res, cfg.k, cfg.s, M)
        Dim = max([W.dim for W in Y] + [(cfg.s + 2 * cfg.k - 2) * (cfg.k - 1)])
        ok, x = rg.classification_check(X, C0, Y, len(C0) - 1, len(Y), Dim, M)
        rows.append({"C0": len(C0), "Y": len(Y), "max_dim": Dim})
        if not ok:
            bad.append({"trial": t, "element": x.to_json()})
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


# ---------------------------------------------------------------------------
# Freiman machinery

@job("llfh", "llfh", "Almost-linear functions: values in Z/p and the Freiman property on additive quadruples.",
     {"p": 13, "d": 2}, {"p": 23, "d": 2})
def _llfh(cfg):
    p, d = cfg.p, cfg.d
    a = fl.unit(0, d)
    f = fr.AlmostLinearFn.carry_example(p, a)
    full = [tuple(int(x) for x in r) for r in fl.grid_points(p, d)]
    half = [h for h in full if 2 * (h[0] % p) < p]
    lands, _ = f.lands_in_zp(full)
    on_half, _ = f.is_freiman_hom(half)
    on_full, ce = f.is_freiman_hom(full, budget=_budget(cfg, 10 ** 7))
    lin = fr.AlmostLinearFn(p, (a,), (1,))
    lin_ok = lin.lands_in_zp(full)[0] is False or lin.is_freiman_hom(full)[0]
    ok = lands and on_half and not on_full and lin_ok
    return JobResult(_verdict(not ok), {}, [] if ok else [{"lands": lands, "half": on_half, "full": on_full}],
                     {"freiman_on_half": on_half, "freiman_on_full": on_full,
                      "full_counterexample": [list(h) for h in ce] if ce else None})


@job("crescale", "crescale", "|P(c)| >= (c/(c+2))^D |P| and P(c1) + P(c2) inside P(c1 + c2).",
     {"p": 101, "d": 3, "trials": 20}, {"p": 101, "d": 3, "trials": 100})
def _crescale(cfg):
    rng = _rng(cfg)
    bad, rows = [], []
    cs = [Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1), Fraction(3, 2)]
    for t in range(cfg.trials):
        P = fr.random_gap(rng, cfg.p, cfg.d, int(rng.integers(1, 4)), max_size=400, proper_order=2)
        for c in cs:
            rep = fr.crescale_check(P, c)
            rows.append({"trial": t, "D": P.D, "c": str(c), "size": rep["size"], "scaled": rep["scaled_size"],
                         "bound": str(rep["bound"])})
            if not rep["holds"]:
                bad.append(rows[-1])
        if not fr.containment_check(P, Fraction(1, 2), Fraction(1, 2)):
            bad.append({"trial": t, "containment": False})
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


@job("gsol-forward", "gsol", "Locally linear maps plus ideal noise are order-4 Freiman and refit exactly.",
     {"p": 13, "d": 3, "s": 2, "trials": 5}, {"p": 13, "d": 3, "s": 2, "trials": 50})
def _gsol(cfg):
    rng = _rng(cfg)
    bad, rows = [], []
    for t in range(cfg.trials):
        M = QuadForm.random_nondegenerate(rng, cfg.p, cfg.d)
        P = fr.random_gap(rng, cfg.p, cfg.d, int(rng.integers(1, 4)), max_size=60)
        rep = fr.verify_cocycle_lemmas("gsol", M, cfg.s, rng, P=P)
        rows.append({"trial": t, "D": P.D, "size": P.size(), **rep.to_json()})
        if not rep.ok:
            bad.append(rows[-1])
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


def _cocycle_job(name, which):
    @job(name, which, f"Forward construction check for the {which} cocycle statement.",
         {"p": 11, "d": 5, "s": 2, "trials": 2}, {"p": 11, "d": 6, "s": 3, "trials": 6})
    def _run(cfg):
        rng = _rng(cfg)
        bad, rows = [], []
        for t in range(cfg.trials):
            M = QuadForm.random_nondegenerate(rng, cfg.p, cfg.d)
            rep = fr.verify_cocycle_lemmas(which, M, cfg.s, rng)
            rows.append(rep.to_json())
            if not rep.ok:
                bad.append(rows[-1])
            if which == "cocozero":
                inv = fr.verify_cocycle_lemmas("cocozero", M, cfg.s, rng, k=2, break_one=True)
                rows.append(inv.to_json())
                if not inv.ok:
                    bad.append(rows[-1])
            if which == "coco01":
                F = {}
                G = random_homogeneous(rng, cfg.p, cfg.d, cfg.s)
                for _ in range(6):
                    x = random_vector(rng, cfg.p, cfg.d, nonzero=True)
                    F[x] = G + mi.random_member(mi.MIdeal.of(M, [x]), cfg.s, rng)
                inv = fr.coco01_inverse(M, cfg.s, F)
                rows.append({"inverse_solved": inv["solved"], "hypothesis": inv["hypothesis"]})
                if not inv["consistent"]:
                    bad.append(rows[-1])
        return JobResult(_verdict(len(bad)), {}, bad, {}, rows)
    return _run


for _name, _which in [("coco01", "coco01"), ("coco1c-forward", "coco1c"), ("cocon1", "cocon1"),
                      ("cocozero", "cocozero"), ("cocoprr-forward", "cocoprr"), ("coco4", "coco4")]:
    _cocycle_job(_name, _which)


@job("cocon2-forward", "cocon2", "Quadratic-plus-locally-linear maps satisfy the two-point cocycle relation.",
     {"p": 13, "d": 3, "s": 3, "trials": 2}, {"p": 13, "d": 4, "s": 3, "trials": 6})
def _cocon2(cfg):
    rng = _rng(cfg)
    bad, rows = [], []
    p, d = cfg.p, cfg.d
    for t in range(cfg.trials):
        M = QuadForm.random_nondegenerate(rng, p, d)
        vs = random_independent(rng, p, d, 2)
        P = fr.GAP.homogeneous(p, tuple(vs), (Fraction(4), Fraction(4)))
        if not P.is_proper(2):
            continue
        rep = fr.verify_cocycle_lemmas("cocon2", M, cfg.s, rng, P=P)
        rows.append(rep.to_json())
        if not rep.ok or rep.checks == 0:
            bad.append(rows[-1])
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


@job("g324-i-ii-iv", "g324", "Large spectrum, quadruple counts on the Bohr set, and a proper GAP inside it.",
     {"p": 7, "d": 2, "trials": 4}, {"p": 11, "d": 2, "trials": 12})
def _g324(cfg):
    rng = _rng(cfg)
    p, d = cfg.p, cfg.d
    bad, rows = [], []
    pts = [tuple(int(x) for x in r) for r in fl.grid_points(p, d)]
    for t in range(cfg.trials):
        if t % 2:
            a = random_vector(rng, p, d, nonzero=True)
            H = [h for h in pts if fl.dot(a, h, p) in (0, 1, p - 1)]
        else:
            H = [h for h in pts if rng.random() < 0.4]
        if not H:
            continue
        rep = fr.g324_check(np.array(H), p, d)
        rows.append({"trial": t, **rep})
        if not rep["ok"]:
            bad.append(rows[-1])
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


# ---------------------------------------------------------------------------
# structure

@job("gsp", "gsp", "Separation map built as in the proof, checked by enumerating V.",
     {"p": 11, "d": 4, "trials": 20}, {"p": 13, "d": 4, "trials": 50})
def _gsp(cfg):
    rng = _rng(cfg)
    p, k = cfg.p, cfg.d
    bad = []
    for t in range(cfg.trials):
        V = random_subspace(rng, p, k, int(rng.integers(0, k)))
        J = [(0,) * k] + [random_vector(rng, p, k) for _ in range(int(rng.integers(0, 4)))]
        if V.dim:
            J.append(V.basis[0])
        S = st.build_separation_map(V, J)
        v = st.verify_separation(S, V, budget=_budget(cfg, 10 ** 6))
        if not v["ok"]:
            bad.append({"trial": t, "violations": [[list(c), list(x)] for c, x in v["violations"]]})
    return JobResult(_verdict(len(bad)), {}, bad)


@job("manyd", "manyd", "Seeded search for structure-obstacle decompositions with independent T's.",
     {"p": 11, "d": 6, "trials": 1}, {"p": 13, "d": 6, "trials": 3})
def _manyd(cfg):
    bad, rows = [], []
    d = cfg.d
    d1 = d // 2
    for q in sorted({7, 11, cfg.p}):
        M = QuadForm.random_nondegenerate(np.random.default_rng(cfg.seed), q, d)
        for t in range(cfg.trials):
            pair = st.StructureObstaclePair.trivial(q, d)
            res = st.find_so_decomposition(M, pair, d1, d - d1, R=1, samples=10 ** 5, seed=cfg.seed + t)
            rows.append({"p": q, "trial": t, "success": res.success, "samples": res.samples_used,
                         "rejected_fraction": _frac(Fraction(sum(res.rejections.values()),
                                                             max(1, res.samples_used)))})
            if q == cfg.p and not res.success:
                bad.append(rows[-1])
    # a small nontrivial pair: one line in Y, one polynomial in C0
    rng = _rng(cfg)
    M = _sq(cfg.p, d)
    g = mi.random_nonmember(mi.MIdeal(M, Subspace.trivial(cfg.p, d)), 2, rng)
    pair = st.StructureObstaclePair([PrimePoly.zero(cfg.p, d), g], [random_subspace(rng, cfg.p, d, 1)], 1, 1, 1)
    res = st.find_so_decomposition(M, pair, d1, d - d1, R=1, seed=cfg.seed)
    if not res.success:
        bad.append({"pair": "nontrivial", "reason": res.reason})
    return JobResult(_verdict(len(bad)), {}, bad, {"nontrivial_pair_rejections": res.rejections}, rows)


@job("g1621", "g1621", "Cube pigeonhole extraction of a large order-16 Freiman subset.",
     {"p": 37, "d": 2, "s": 2, "trials": 2}, {"p": 37, "d": 2, "s": 2, "trials": 6})
def _g1621(cfg):
    rng = _rng(cfg)
    p, d, s = cfg.p, cfg.d, cfg.s
    M = QuadForm.sum_of_squares(p, d)
    bad, rows = [], []
    pair = st.StructureObstaclePair.trivial(p, d)
    V = Subspace.full(p, d)
    for t in range(cfg.trials):
        v = random_vector(rng, p, d, nonzero=True)
        P = fr.GAP.homogeneous(p, (v,), (Fraction(3),))
        if not P.is_proper(8):
            continue
        xi, _ = fr.random_locally_linear(rng, P, M, s)
        W = list(xi)
        pre = st.classification_on_relations(xi, W, M, pair, n=4, s=s)
        ex = st.extract_freiman_subset(W, pair, V, xi, M, s, seed=cfg.seed, budget=_budget(cfg, 10 ** 5))
        zero = {h: PrimePoly.zero(p, d) for h in W}
        ez = st.extract_freiman_subset(W, pair, V, zero, M, s, seed=cfg.seed, budget=_budget(cfg, 10 ** 5))
        row = {"trial": t, "precondition": pre.holds, **ex.to_json(), "zero_map_full": len(ez.W_prime) == len(W)}
        rows.append(row)
        if not (pre.holds and ex.bound_ok and ex.freiman.holds and ez.freiman.holds):
            bad.append(row)
    return JobResult(_verdict(len(bad)), {}, bad, {}, rows)


def lemma_ids() -> list:
    return list(REGISTRY)


def run_job(cfg: ExperimentConfig) -> JobResult:
    return REGISTRY[cfg.lemma].run(cfg)
