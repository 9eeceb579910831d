"""Root count / concavity classes of the Allee-predation slice over (K, Delta),
with the driver orbit overlaid."""

import argparse
import collections
import math
import os

import numpy as np

from tippingscope.bifurcation import region_map
from tippingscope.models import AlleePredationModel
from tippingscope.svg import Heatmap, Series, emit_svg


def label(c):
    return f"{c.n_roots} roots, {'cc' if c.concave_convex else 'not cc'}, " \
           f"{'d-concave' if c.d_concave else 'not d-concave'}"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=100)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--outdir", default="out")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    m = AlleePredationModel()
    Ks, Ds, classes = region_map(m, grid=(args.grid, args.grid), threads=args.threads)
    cats = [[label(c) for c in row] for row in classes]
    print(collections.Counter(x for row in cats for x in row))

    w = np.linspace(0, 2 * math.pi, 361)
    orbit = Series(m.K0 + m.K1 * np.cos(w), m.D0 + m.D1 * np.sin(w), "orbit")
    kw, dw = Ks[1] - Ks[0], Ds[1] - Ds[0]
    heat = Heatmap(np.append(Ks - kw / 2, Ks[-1] + kw / 2), np.append(Ds - dw / 2, Ds[-1] + dw / 2),
                   cats)
    emit_svg(os.path.join(args.outdir, "region_map.svg"), [orbit], heat,
             title="classes of y -> h(K, Delta, y)", xlabel="K", ylabel="Delta")


if __name__ == "__main__":
    main()
