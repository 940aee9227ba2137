"""Acceptance criteria 1-9. Each test records a PASS/FAIL line shown in the terminal summary."""
import time
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from acceptance_log import record
from silab import cli, report
from silab import freiman as fr
from silab import quadform as qf
from silab import relgraph as rg
from silab import structure as so
from silab.field_linalg import Subspace, random_independent
from silab.quadform import QuadForm
from silab.registry import ExperimentConfig

pytestmark = pytest.mark.acceptance


def _job(lemma, profile="full", **kw):
    return report.run(ExperimentConfig(lemma, **kw), profile)


# 1 -------------------------------------------------------------------------

def test_criterion_1_counting():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = []
    for p in (5, 7, 11, 13):
        for d in (3, 4, 5):
            rep = qf.count_variety_affine(QuadForm.sum_of_squares(p, d), Subspace.full(p, d))
            dev = rep.count - p ** (d - 1)
            assert dev * dev <= p ** d, (p, d, rep.count)
        for r, d in ((1, 5), (1, 6), (2, 7)):
            for _ in range(1 if p ** d > 10 ** 7 else 3):
                hs = random_independent(rng, p, d, r)
                rep = qf.count_common_variety(QuadForm.sum_of_squares(p, d), hs)
                main = p ** (d - r - 1)
                dev = rep.count - main
                # |dev| <= 2 main p^(-1/2), squared to stay exact
                assert dev * dev * p <= 4 * main * main, (p, d, r, rep.count)
                worst.append(Fraction(dev * dev * p, main * main))
    dt = time.perf_counter() - t0
    ok = dt <= 60
    record(1, ok, f"{dt:.1f}s, max (dev/main)^2 p = {max(worst)}")
    assert ok


# 2 -------------------------------------------------------------------------

def test_criterion_2_intersections():
    t0 = time.perf_counter()
    reps = [_job("gr-1", p=5, d=8, trials=200)]
    reps += [_job("gr0/gri", p=p, d=7, s=1, trials=200) for p in (11, 13)]
    dt = time.perf_counter() - t0
    clean = all(r.outcome == "pass" and not r.counterexamples for r in reps)
    broken = [r.observed["counterexamples_when_violated"] for r in reps]
    met = [r.hypotheses.get("instances_meeting_hypothesis") for r in reps[1:]]
    ok = clean and all(b >= 1 for b in broken) and all(m for m in met) and dt <= 300
    record(2, ok, f"violated-hypothesis counterexamples {broken}, {dt:.1f}s")
    assert ok


# 3 -------------------------------------------------------------------------

def _eight_vertex_graphs():
    """All graphs on 8 vertices up to isomorphism: extend each 7-vertex graph by one vertex."""
    seen, out = {}, []
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() != 7:
            continue
        for mask in range(128):
            h = g.copy()
            h.add_node(7)
            h.add_edges_from((i, 7) for i in range(7) if mask >> i & 1)
            key = (h.number_of_edges(), tuple(sorted(dg for _, dg in h.degree())),
                   nx.weisfeiler_lehman_graph_hash(h, iterations=3))
            bucket = seen.setdefault(key, [])
            if any(nx.is_isomorphic(h, x) for x in bucket):
                continue
            bucket.append(h)
            out.append(h)
    return out


@pytest.fixture(scope="module")
def small_graphs():
    atlas = [g for g in nx.graph_atlas_g()[1:]]
    eight = _eight_vertex_graphs()
    return atlas, eight


def test_criterion_3_relation_graph_numbers(small_graphs):
    t0 = time.perf_counter()
    C5 = rg.RelGraph.cycle(5)
    c5 = rg.dd_number(C5).value == 3 and rg.cc_number(C5).value == 3
    M4 = rg.mycielski_graph(4)
    cc4, dd4 = rg.cc_number(M4).value, rg.dd_number(M4).value
    atlas, eight = small_graphs
    assert len(eight) == 12346  # number of graphs on 8 vertices
    mismatches = 0
    for g in atlas + eight:
        G = rg.RelGraph.from_networkx(g)
        b = rg.dd_bruteforce(G)
        if b is None:
            b = rg.dd_bruteforce(G, node_budget=10 ** 8)
        mismatches += b != rg.dd_number(G).value
    dt = time.perf_counter() - t0
    holds = c5 and cc4 >= 6 and mismatches == 0 and dt <= 600
    record(3, holds and dd4 <= 4,
           f"C5 ok={c5}, cc(M_4)={cc4}, dd(M_4)={dd4} (claimed <= 4), "
           f"LP vs brute force mismatches {mismatches} on {len(atlas) + len(eight)} graphs, {dt:.0f}s")
    assert holds


@pytest.mark.xfail(strict=True, reason="M_4 is triangle-free, so its cliques are edges and dd(M_4) = 6")
def test_criterion_3_mycielski_dd_claim():
    assert rg.dd_number(rg.mycielski_graph(4)).value <= 4


# 4 -------------------------------------------------------------------------

def test_criterion_4_lonely_and_chain(small_graphs):
    lon = _job("lonely", trials=50)
    rng = np.random.default_rng(4)
    direct = 0
    for _ in range(50):
        n = int(rng.integers(1, 10))
        G = rg.RelGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)
                                       if rng.random() < rng.random()])
        direct += rg.dd_number(G.add_isolated()).value != rg.dd_number(G).value + 1
    chain = _job("basicdn")
    atlas, eight = small_graphs
    built = [rg.RelGraph.from_networkx(g) for g in atlas + eight]
    built += [rg.mycielski_graph(i) for i in (3, 4)] + [rg.mycielski_graph(4).complement()]
    chain_bad = sum(not rg.basicdn_report(G)["ok"] for G in built)
    ok = lon.outcome == "pass" and direct == 0 and chain.outcome == "pass" and chain_bad == 0
    record(4, ok, f"lonely violations {len(lon.counterexamples) + direct}, "
                  f"chain violations {chain_bad} on {len(built)} graphs plus the job")
    assert ok


# 5 -------------------------------------------------------------------------

def test_criterion_5_nott():
    rep = _job("nott", p=11, d=7)
    ok = rep.outcome == "pass" and rep.observed["verdicts"] == [True, True, False]
    record(5, ok, f"verdicts {rep.observed['verdicts']}")
    assert ok


# 6 -------------------------------------------------------------------------

def test_criterion_6_freiman():
    rng = np.random.default_rng(6)
    fails, sizes = 0, []
    for i in range(50):
        p = int(rng.choice([101, 211, 401]))
        M = QuadForm.random_nondegenerate(rng, p, 3)
        P = fr.random_gap(rng, p, 3, int(rng.integers(1, 4)), max_size=2000)
        sizes.append(P.size())
        xi, _ = fr.random_locally_linear(rng, P, M, 2, noise=False)
        r = fr.is_freiman_hom(xi, list(xi), M, n=2)
        fails += not (r.holds and r.mode == "exhaustive")
        noisy, _ = fr.random_locally_linear(rng, P, M, 2, noise=True)
        fit = fr.fit_locally_linear(noisy, P, M)
        fails += not (fit.feasible and fit.residual_failures == 0)
        for c in (Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(3, 2)):
            fails += not fr.crescale_check(P, c)["holds"]
        if P.size() <= 60:
            r = fr.is_freiman_hom(noisy, list(noisy), M, n=2)
            fails += not (r.holds and r.mode == "exhaustive")
    ns = fr.N(0) == 7248 and fr.N(1) == 8424
    ok = fails == 0 and ns and max(sizes) <= 2000
    record(6, ok, f"{fails} failures on 50 GAPs (largest |P| = {max(sizes)}), N(0), N(1) = {fr.N(0)}, {fr.N(1)}")
    assert ok


# 7 -------------------------------------------------------------------------

def test_criterion_7_constructive():
    wc = _job("gweakcore1", p=7, d=11, s=1, k=2, trials=50)
    gsp = _job("gsp", trials=50)
    found, bad = 0, 0
    for p in (11, 13):
        for seed in range(5):
            M = QuadForm.random_nondegenerate(np.random.default_rng(seed), p, 6)
            res = so.find_so_decomposition(M, so.StructureObstaclePair.trivial(p, 6), 3, 3,
                                           samples=10 ** 5, seed=seed)
            found += res.success
            bad += not res.success or not all(v["ok"] for v in res.verifications)
    ok = wc.outcome == "pass" and gsp.outcome == "pass" and bad == 0
    record(7, ok, f"weak core {wc.outcome} on 50 fibers, gsp {gsp.outcome} on 50, "
                  f"decompositions {found}/10")
    assert ok


# 8 -------------------------------------------------------------------------

FORWARD = ["coco01", "coco1c-forward", "cocon1", "cocozero", "cocoprr-forward", "coco4",
           "cocon2-forward", "gsol-forward"]


def test_criterion_8_forward_checks():
    reps = {lemma: _job(lemma) for lemma in FORWARD}
    red = [k for k, r in reps.items() if r.outcome != "pass" or r.counterexamples]
    record(8, not red, "red: " + ", ".join(red) if red else f"{len(FORWARD)} forward jobs, 0 failures")
    assert not red


# 9 -------------------------------------------------------------------------

def test_criterion_9_determinism(tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    monkeypatch.setenv("SILAB_THREADS", "1")
    ca = cli.main(["suite", "full", "--seed", "0", "--out", str(a)])
    monkeypatch.setenv("SILAB_THREADS", "2")
    cb = cli.main(["suite", "full", "--seed", "0", "--out", str(b)])
    same = a.read_bytes() == b.read_bytes() and ca == cb
    mut = cli.run_suite("fast", mutate=True, n_workers=1)
    red = sorted(j.config["lemma"] for j in mut.jobs if j.outcome == "fail" and j.config["lemma"] != "exex001")
    ok = same and len(red) >= 1
    record(9, ok, f"identical={same}, mutation turns {len(red)} jobs red")
    assert ok
