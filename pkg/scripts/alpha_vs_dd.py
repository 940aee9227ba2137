"""How far dd sits above the independence number on random graphs."""
import argparse
from collections import Counter

import numpy as np

from silab import relgraph as rg


def random_graph(rng, n, q):
    return rg.RelGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < q])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=9)
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    rng = np.random.default_rng(a.seed)
    gaps = Counter()
    worst = None
    for _ in range(a.trials):
        G = random_graph(rng, a.n, float(rng.random()))
        al, dd, cc = rg.independence_number(G), rg.dd_number(G).value, rg.cc_number(G).value
        assert al <= dd <= cc
        gaps[(dd - al, cc - dd)] += 1
        if worst is None or cc - dd > worst[0]:
            worst = (cc - dd, G.to_edge_list())
    print("(dd - alpha, cc - dd): count")
    for k in sorted(gaps):
        print(f"  {k}: {gaps[k]}")
    print(f"largest cc - dd = {worst[0]}")
    if worst[0]:
        print(worst[1], end="")
