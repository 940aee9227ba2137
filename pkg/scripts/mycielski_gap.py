"""Clique cover versus density dependence on Mycielskians, their complements and Kneser graphs.

Mycielskians are triangle-free, so both numbers equal ceil(n/2) there. The
bound dd <= i does hold for the complements, whose clique covers are colourings.
"""
import argparse
import itertools

from silab import relgraph as rg
from silab.report import to_markdown


def kneser(n, k):
    verts = [frozenset(c) for c in itertools.combinations(range(n), k)]
    edges = [(i, j) for i, j in itertools.combinations(range(len(verts)), 2) if not verts[i] & verts[j]]
    return rg.RelGraph.from_edges(len(verts), edges)


def row(name, G):
    dd = rg.dd_number(G)
    return {"graph": name, "n": G.n, "alpha": rg.independence_number(G), "dd": dd.value,
            "fractional": str(dd.fractional), "cc": rg.cc_number(G).value}


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-i", type=int, default=5)
    a = ap.parse_args()
    out = []
    for i in range(3, a.max_i + 1):
        G = rg.mycielski_graph(i)
        out.append(row(f"M_{i}", G))
        out.append(row(f"complement of M_{i}", G.complement()))
    for n, k in [(5, 2), (6, 2), (7, 2)]:
        K = kneser(n, k)
        out.append(row(f"K({n},{k})", K))
        out.append(row(f"complement of K({n},{k})", K.complement()))
    print(to_markdown(out), end="")
