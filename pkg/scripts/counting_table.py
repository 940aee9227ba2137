"""Exact quadric point counts next to their main terms, as a markdown or CSV table."""
import argparse

import numpy as np

from silab import quadform as qf
from silab.field_linalg import Subspace, random_independent
from silab.quadform import QuadForm
from silab.report import COUNTING_COLUMNS, to_csv, to_markdown


def rows(ps, ds, rs, seed):
    rng = np.random.default_rng(seed)
    out = []
    for p in ps:
        for d in ds:
            M = QuadForm.sum_of_squares(p, d)
            for r in rs:
                if r and d - 2 * r < 3:
                    continue
                if r == 0:
                    rep = qf.count_variety_affine(M, Subspace.full(p, d))
                else:
                    rep = qf.count_common_variety(M, random_independent(rng, p, d, r))
                out.append(dict(zip(COUNTING_COLUMNS, [p, d, r, rep.count, rep.main_term, str(rep.deviation)])))
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, nargs="+", default=[5, 7, 11, 13])
    ap.add_argument("--d", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--r", type=int, nargs="+", default=[0, 1])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", action="store_true")
    a = ap.parse_args()
    t = rows(a.p, a.d, a.r, a.seed)
    print(to_csv(t) if a.csv else to_markdown(t), end="")
