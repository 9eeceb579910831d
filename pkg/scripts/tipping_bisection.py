"""Bisection for the tracking/tipping threshold of the predation-pulse
equation, plus the upper pullback solution on both sides of it."""

import argparse
import json
import os
import time

import numpy as np

from tippingscope.errors import UnexpectedRootCount
from tippingscope.models import TransitionModel
from tippingscope.transition import future_limits, locate_tipping, pullback_solution
from tippingscope.svg import Series, emit_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--horizon", type=float, default=1e5)
    ap.add_argument("--tol", type=float, default=1e-3)
    ap.add_argument("--epsilon", type=float, default=1e-3)
    ap.add_argument("--outdir", default="out")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    model = TransitionModel()
    t0 = time.perf_counter()
    rep = locate_tipping(model, 0.0, 1.0, tol=args.tol, horizon=args.horizon, epsilon=args.epsilon,
                         progress=lambda r, o: print(f"rho={r:.10f} {o.value}"))
    lo, hi = rep.bracket
    print(f"bracket [{lo:.10f}, {hi:.10f}] in {time.perf_counter() - t0:.1f}s")

    # loss of the upper future equilibrium, for comparison
    a, b = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (a + b)
        try:
            future_limits(model.with_rho(mid))
            a = mid
        except UnexpectedRootCount:
            b = mid
    rho_sn = a
    print(f"future saddle-node at rho = {rho_sn:.9f}")

    ts = np.linspace(-200, 400, 1201)
    series = []
    for rho in (0.0, lo, hi, rho_sn):
        u = pullback_solution(model, rho, "upper", t_end=400.0)
        series.append(Series(ts, u.sample_many(ts), f"rho={rho:.4f}"))
    emit_svg(os.path.join(args.outdir, "tipping_traces.svg"), series,
             title="upper pullback solutions", xlabel="t", ylabel="y")

    with open(os.path.join(args.outdir, "tipping.json"), "w") as fh:
        json.dump({**rep.to_dict(), "classifications": [c.value for c in rep.classifications],
                   "rho_saddle_node": rho_sn}, fh, indent=2)


if __name__ == "__main__":
    main()
