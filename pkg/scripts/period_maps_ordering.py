"""Period maps of the split cosine families and the O1-O5 ordering table."""

import argparse
import json
import os

import numpy as np

from tippingscope.bifurcation import classify_order, mu_cosine_closed_form
from tippingscope.models import PeriodicModel
from tippingscope.poincare import find_fixed_points, period_map_batch
from tippingscope.svg import Series, emit_svg

CASES = [(0.005, 0.005), (0.05, 0.005), (0.005, 0.05), (0.05, 0.05), (0.5, 0.5)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=float, default=0.1)
    ap.add_argument("--outdir", default="out")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    mu = mu_cosine_closed_form(args.d)
    xs = np.linspace(-30, 30, 400)
    rows = []
    for gm, gp in CASES:
        m = PeriodicModel(args.d, gm, gp)
        tm = m.with_split("minus").with_lambda(mu.mu_plus).field
        tp = m.with_split("plus").with_lambda(mu.mu_minus).field
        n_minus, n_plus = find_fixed_points(tm).count, find_fixed_points(tp).count
        case = classify_order(args.d, gm, gp).case
        rows.append({"g_minus": gm, "g_plus": gp, "fix_T_minus": n_minus,
                     "fix_T_plus": n_plus, "case": case})
        print(f"g-={gm:<6} g+={gp:<6} #T-={n_minus} #T+={n_plus} {case}")

        series = [Series(xs, xs, "identity")]
        for name, f in (("T- at mu+", tm), ("T+ at mu-", tp)):
            T = period_map_batch(f, xs)
            ok = np.isfinite(T) & (np.abs(T) < 60)
            series.append(Series(xs[ok], T[ok], name))
        emit_svg(os.path.join(args.outdir, f"period_maps_{gm}_{gp}.svg"), series,
                 title=f"g- = {gm}, g+ = {gp}", xlabel="x", ylabel="T(x)", ylim=(-60, 60))

    with open(os.path.join(args.outdir, "ordering.json"), "w") as fh:
        json.dump({"mu_minus": mu.mu_minus, "mu_plus": mu.mu_plus, "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
