"""Rejection statistics of the structure-obstacle decomposition search."""
import argparse
from collections import Counter

import numpy as np

from silab import mideal as mi
from silab import structure as so
from silab.field_linalg import Subspace, random_subspace
from silab.polyring import PrimePoly
from silab.quadform import QuadForm


def pair_for(kind, M, rng):
    p, d = M.p, M.d
    if kind == "trivial":
        return so.StructureObstaclePair.trivial(p, d)
    g = mi.random_nonmember(mi.MIdeal(M, Subspace.trivial(p, d)), 2, rng)
    return so.StructureObstaclePair([PrimePoly.zero(p, d), g], [random_subspace(rng, p, d, 1)], 1, 1, 1)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, nargs="+", default=[7, 11, 13])
    ap.add_argument("--d", type=int, default=6)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    d1 = a.d // 2
    for p in a.p:
        for kind in ("trivial", "line+poly"):
            rng = np.random.default_rng(a.seed)
            why, used, ok = Counter(), 0, 0
            for t in range(a.trials):
                M = QuadForm.random_nondegenerate(rng, p, a.d)
                res = so.find_so_decomposition(M, pair_for(kind, M, rng), d1, a.d - d1, seed=a.seed + t)
                ok += res.success
                used += res.samples_used
                why.update(res.rejections)
            frac = sum(why.values()) / max(1, used)
            print(f"p={p:3d} {kind:9s} success {ok}/{a.trials}  samples {used}  rejected {frac:.3f}  {dict(why)}")
