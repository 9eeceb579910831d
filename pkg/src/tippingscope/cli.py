"""``tippingscope`` command-line front end.

Every subcommand writes a JSON report (``--out -`` means standard output).
Exit codes: 0 success, 1 I/O error, 2 domain error, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .bifurcation import (TWO_PI, allee_decomposition, classify_order, compute_mu,
                          dconcavity_band, find_lambda_pair, inflection_curve,
                          mu_cosine_closed_form, region_map)
from .errors import TippingscopeError
from .models import AlleePredationModel, DriverOrbit, PeriodicModel, TransitionModel
from .odeint import IntegratorConfig, integrate
from .poincare import DEFAULT_N_SCAN, DEFAULT_WINDOW, find_fixed_points, period_map_batch
from .shapefit import build_basis, eval_spline, fit as fit_spline, read_dataset_csv
from .svg import Heatmap, Series, emit_svg
from .transition import (TRANSITION_CONFIG, Outcome, classify_run, locate_tipping,
                         past_limits, pullback_solution)

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2, 64

CONFIG_KEYS = {
    "model.type": str, "model.r": float, "model.S": float, "model.b": float,
    "model.K0": float, "model.K1": float, "model.D0": float, "model.D1": float,
    "model.rho": float, "periodic.d": float, "periodic.g_minus": float,
    "periodic.g_plus": float, "periodic.lambda": float, "driver.t_ref": float,
    "driver.omega_ref": float,
}

REGION_COLORS = {
    "3 roots, cc, not d-concave": "#4c72b0",
    "3 roots, cc, d-concave": "#55a868",
    "1 roots, cc, not d-concave": "#c44e52",
    "1 roots, cc, d-concave": "#dd8452",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# configuration


def load_config(path: str) -> Dict[str, object]:
    """Parse a ``key = value`` file; ``[section]`` headers prefix later keys."""
    cfg: Dict[str, object] = {}
    section = ""
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if section and "." not in key:
                key = f"{section}.{key}"
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                cfg[key] = CONFIG_KEYS[key](value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return cfg


def _pick(flag, cfg, key, default):
    if flag is not None:
        return flag
    return cfg.get(key, default)


def _allee(cfg) -> AlleePredationModel:
    base = AlleePredationModel()
    kw = {k: cfg[f"model.{k}"] for k in ("r", "S", "b", "K0", "K1", "D0", "D1") if f"model.{k}" in cfg}
    return AlleePredationModel(**{**base.__dict__, **kw})


def _driver(cfg) -> DriverOrbit:
    d = DriverOrbit()
    return DriverOrbit(cfg.get("driver.t_ref", d.t_ref), cfg.get("driver.omega_ref", d.omega_ref))


def _transition(args, cfg) -> TransitionModel:
    rho = _pick(getattr(args, "rho", None), cfg, "model.rho", 0.0)
    return TransitionModel(_allee(cfg), float(rho), driver=_driver(cfg))


def _periodic(args, cfg, lam=None) -> PeriodicModel:
    d = _pick(getattr(args, "d", None), cfg, "periodic.d", 0.1)
    gm = _pick(getattr(args, "g_minus", None), cfg, "periodic.g_minus", 0.005)
    gp = _pick(getattr(args, "g_plus", None), cfg, "periodic.g_plus", 0.005)
    return PeriodicModel(float(d), float(gm), float(gp), 0.0 if lam is None else float(lam))


def _resolve_lambda(token, cfg, model: PeriodicModel) -> float:
    if token is None:
        return float(cfg.get("periodic.lambda", 0.0))
    if token in ("mu_plus", "mu_minus"):
        mu = compute_mu(np.cos, lambda s: model.d)
        return mu.mu_plus if token == "mu_plus" else mu.mu_minus
    try:
        return float(token)
    except ValueError:
        raise UsageError(f"--lambda expects a number, mu_plus or mu_minus, got {token!r}") from None


def _pair(text, name):
    try:
        a, b = (float(s) for s in text.split(","))
    except ValueError:
        raise UsageError(f"{name} expects two comma-separated numbers, got {text!r}") from None
    return a, b


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("TIPPINGSCOPE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"TIPPINGSCOPE_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(report) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


class Run:
    """Collects the pieces of a run report."""

    def __init__(self, args, config):
        self.args = args
        self.config = config
        self.outputs: List[str] = []
        self.warnings: List[str] = []
        self.t0 = time.perf_counter()

    def note(self, msg):
        if not self.args.quiet:
            print(msg, file=sys.stderr)

    def warn(self, msg):
        self.warnings.append(msg)
        self.note(f"warning: {msg}")

    def svg(self, path, **kw):
        if path:
            emit_svg(path, **kw)
            self.outputs.append(path)

    def finish(self, result, settings):
        report = {
            "command": self.args.command,
            "version": __version__,
            "config": {"file": dict(sorted(self.config.items())), "settings": settings},
            "deterministic": "no random numbers; output is a pure function of the settings",
            "outputs": list(self.outputs),
            "warnings": list(self.warnings),
            "result": result,
        }
        if self.args.timing:
            report["wall_time_s"] = time.perf_counter() - self.t0
        _write_text(self.args.out, dumps(report))


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args, run: Run):
    cfg = run.config
    mtype = args.type or cfg.get("model.type", "periodic")
    icfg = IntegratorConfig(abs_tol=args.tol, rel_tol=args.tol, x_guard=args.x_guard,
                            h_init=min(1e-3, abs(args.t1 - args.t0)))
    if mtype == "periodic":
        model = _periodic(args, cfg)
        lam = _resolve_lambda(args.lam, cfg, model)
        model = model.with_lambda(lam).with_split(args.split)
        f = model.field
        settings = {"type": mtype, "d": model.d, "g_minus": model.g_minus,
                    "g_plus": model.g_plus, "lambda": lam, "split": args.split}
    elif mtype == "transition":
        model = _transition(args, cfg)
        f = model.field
        settings = {"type": mtype, "rho": model.rho, **_allee(cfg).__dict__,
                    "t_ref": model.driver.t_ref, "omega_ref": model.driver.omega_ref}
    elif mtype == "allee":
        base = _allee(cfg)
        f = base.slice_field(args.omega)
        settings = {"type": mtype, "omega": args.omega, **base.__dict__}
    else:
        raise UsageError(f"unknown model type {mtype!r}")
    settings.update(t0=args.t0, t1=args.t1, x0=args.x0, tol=args.tol, x_guard=args.x_guard,
                    samples=args.samples)
    traj = integrate(f, args.t0, args.x0, args.t1, icfg)
    lo, hi = traj.span()
    ts = np.linspace(args.t0, traj.t_final, args.samples)
    xs = traj.sample_many(ts)
    result = {
        "status": "Completed" if traj.completed else "BlewUp",
        "t_final": traj.t_final,
        "x_final": traj.x_final,
        "n_steps": traj.n_steps,
        "n_rejected": traj.n_rejected,
        "blowup": None if traj.blowup is None else
        {"t_escape": traj.blowup.t_escape, "direction": "+inf" if traj.blowup.direction > 0 else "-inf"},
        "samples": {"t": ts, "x": xs},
    }
    run.svg(args.svg, series=[Series(ts, xs, "x(t)")], title=f"{mtype} trajectory",
            xlabel="t", ylabel="x")
    return result, settings


def cmd_poincare(args, run: Run):
    model = _periodic(args, run.config)
    lam = _resolve_lambda(args.lam, run.config, model)
    model = model.with_lambda(lam).with_split(args.split)
    window = _pair(args.window, "--window")
    fps = find_fixed_points(model.field, window, args.n_scan)
    for n in fps.notes:
        run.note(n)
    if fps.anomaly:
        run.warn("more fixed points than a concave/convex map admits")
    if args.svg:
        xs = np.linspace(window[0], window[1], 400)
        T = period_map_batch(model.field, xs)
        ok = np.isfinite(T)
        series = [Series(xs[ok], T[ok], "T(x)"), Series(xs, xs, "identity")]
        if fps.points:
            series.append(Series([p.x for p in fps.points], [p.x for p in fps.points],
                                 "fixed points", markers=True))
        run.svg(args.svg, series=series, title=f"period map, split={args.split}",
                xlabel="x", ylabel="T(x)", ylim=(window[0], window[1]))
    settings = {"d": model.d, "g_minus": model.g_minus, "g_plus": model.g_plus,
                "lambda": lam, "lambda_token": args.lam, "split": args.split,
                "window": list(window), "n_scan": args.n_scan}
    return fps.to_dict(), settings


def cmd_mu(args, run: Run):
    d = float(_pick(args.d, run.config, "periodic.d", 0.1))
    if d <= 0:
        raise UsageError("--d must be positive")
    grid = np.linspace(0.0, TWO_PI, args.omega_grid + 1)[:-1]
    settings = {"d": d, "c": args.c, "omega_grid": args.omega_grid}
    if args.c == "cosine":
        quad = compute_mu(np.cos, lambda s: d, grid)
        closed = mu_cosine_closed_form(d)
        gap = max(abs(quad.mu_minus - closed.mu_minus), abs(quad.mu_plus - closed.mu_plus))
        result = {**quad.to_dict(), "closed_form": closed.to_dict(), "disagreement": gap}
    else:
        try:
            c0 = float(args.c)
        except ValueError:
            raise UsageError(f"--c expects 'cosine' or a constant, got {args.c!r}") from None
        quad = compute_mu(lambda s: np.full(np.shape(s), c0), lambda s: d, grid)
        result = quad.to_dict()
    return result, settings


def cmd_lambda(args, run: Run):
    model = _periodic(args, run.config)
    search = _pair(args.search, "--search")
    window = _pair(args.window, "--window")
    pair = find_lambda_pair(model, search, args.tol, window, args.n_scan)
    settings = {"d": model.d, "g_minus": model.g_minus, "g_plus": model.g_plus,
                "search": list(search), "tol": args.tol, "window": list(window),
                "n_scan": args.n_scan}
    return pair.to_dict(), settings


def cmd_classify_order(args, run: Run):
    model = _periodic(args, run.config)
    window = _pair(args.window, "--window")
    oc = classify_order(model.d, model.g_minus, model.g_plus, window, args.n_scan,
                        omega_grid=args.omega_grid)
    settings = {"d": model.d, "g_minus": model.g_minus, "g_plus": model.g_plus,
                "window": list(window), "n_scan": args.n_scan, "omega_grid": args.omega_grid}
    return oc.to_dict(), settings


def cmd_band(args, run: Run):
    base = _allee(run.config)
    grid = np.linspace(0.0, TWO_PI, args.omega_grid + 1)[:-1]
    curve = inflection_curve(base, grid)
    if curve.failures:
        run.warn(f"no inflection bracket at {len(curve.failures)} grid angles")
    band = dconcavity_band(allee_decomposition(base), grid, args.x_max)
    if args.svg:
        series = [Series(grid, band.alpha, "alpha"), Series(grid, band.beta, "beta"),
                  Series(grid, band.alpha_star, "alpha*"), Series(grid, band.beta_star, "beta*")]
        run.svg(args.svg, series=series, title="d-concavity band about the inflection curve",
                xlabel="omega", ylabel="x")
    result = {"band": band.to_dict(), "inflection": curve.to_dict(),
              "hy_positive": bool(np.all(curve.h_y > 0)),
              "hyyy_negative": bool(np.all(curve.h_yyy < 0))}
    settings = {"omega_grid": args.omega_grid, "x_max": args.x_max, **base.__dict__}
    return result, settings


def _region_label(c):
    return (f"{c.n_roots} roots, {'cc' if c.concave_convex else 'not cc'}, "
            f"{'d-concave' if c.d_concave else 'not d-concave'}")


def cmd_region_map(args, run: Run):
    base = _allee(run.config)
    try:
        nK, nD = (int(s) for s in args.grid.lower().split("x"))
    except ValueError:
        raise UsageError(f"--grid expects NxM, got {args.grid!r}") from None
    if nK < 1 or nD < 1:
        raise UsageError("--grid sizes must be positive")
    K_range = _pair(args.k_range, "--K-range")
    D_range = _pair(args.d_range, "--D-range")
    Ks, Ds, classes = region_map(base, K_range, D_range, (nK, nD), threads=_threads(args))
    counts: Dict[str, int] = {}
    for row in classes:
        for c in row:
            counts[_region_label(c)] = counts.get(_region_label(c), 0) + 1
    near = sum(c.near_degenerate for row in classes for c in row)
    if near:
        run.warn(f"{near} cells lie close to a root tangency")
    if args.svg:
        kx = np.linspace(*K_range, nK + 1)
        dy = np.linspace(*D_range, nD + 1)
        cats = [[_region_label(c) for c in row] for row in classes]
        run.svg(args.svg, heatmap=Heatmap(kx, dy, cats, REGION_COLORS),
                title="root count and concavity of h(y) by (K, Delta)",
                xlabel="K", ylabel="Delta")
    settings = {"grid": [nK, nD], "K_range": list(K_range), "D_range": list(D_range),
                **base.__dict__}
    if args.out != "-" and args.out.lower().endswith(".csv"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["K", "Delta", "n_roots", "cc", "dconc"])
        for K, row in zip(Ks, classes):
            for D, c in zip(Ds, row):
                w.writerow([repr(float(K)), repr(float(D)), c.n_roots,
                            int(c.concave_convex), int(c.d_concave)])
        return {"csv": buf.getvalue()}, settings
    cells = [{"K": float(K), "Delta": float(D), **c.to_dict()}
             for K, row in zip(Ks, classes) for D, c in zip(Ds, row)]
    return {"counts": counts, "cells": cells}, settings


def cmd_tipping(args, run: Run):
    model = _transition(args, run.config)
    icfg = IntegratorConfig(abs_tol=args.int_tol, rel_tol=args.int_tol, h_init=1e-2)
    settings = {"horizon": args.horizon, "epsilon": args.epsilon, "tol": args.tol,
                "integrator_tol": args.int_tol, "early_exit": not args.no_early_exit,
                **model.base.__dict__, "t_ref": model.driver.t_ref,
                "omega_ref": model.driver.omega_ref}
    lim = past_limits(model)
    result = {"past_limits": lim.to_dict()}
    if args.classify:
        rhos = [float(s) for s in args.classify.split(",")]
        settings["classify"] = rhos
        result["classifications"] = [
            {"rho": r, "outcome": classify_run(model, r, args.horizon, args.epsilon, cfg=icfg,
                                               early_exit=not args.no_early_exit).value}
            for r in rhos]
        trace = rhos
    else:
        bracket = _pair(args.bracket, "--bracket")
        settings["bracket"] = list(bracket)
        rep = locate_tipping(model, bracket[0], bracket[1], args.tol, args.horizon, args.epsilon,
                             icfg, early_exit=not args.no_early_exit,
                             progress=lambda r, o: run.note(f"rho={r:.10g}: {o.value}"))
        result["report"] = rep.to_dict()
        result["monotone"] = rep.is_monotone()
        trace = list(rep.bracket)
    if args.trace_svg:
        series = []
        for r in trace:
            tr = pullback_solution(model, r, "upper", t_end=args.trace_window[1], cfg=icfg,
                                   certify=False)
            ts = np.linspace(args.trace_window[0], min(args.trace_window[1], tr.t_final), 800)
            series.append(Series(ts, tr.sample_many(ts), f"upper, rho={r:.7g}"))
        run.svg(args.trace_svg, series=series, title="locally pullback attractive upper solutions",
                xlabel="t", ylabel="y")
    return result, settings


def cmd_fit(args, run: Run):
    data = read_dataset_csv(args.csv, args.mode)
    if data.excluded_rows:
        run.note(f"excluded {data.excluded_rows} rows with an extinct next generation")
    basis = build_basis(args.a, args.b, args.m, args.n)
    sf = fit_spline(basis, data, args.lb)
    result = sf.to_dict()
    result.update(excluded_rows=data.excluded_rows, n_points=len(data))
    svg_path = args.svg or args.plot
    if svg_path:
        xs = np.linspace(0.0, basis.b, 600)
        theta = eval_spline(sf, xs)[0]
        run.svg(svg_path, series=[Series(data.x, data.y, "data", markers=True),
                                  Series(xs, theta, "spline")],
                title="concave-convex regression spline", xlabel="x", ylabel="growth")
    settings = {"csv": os.path.basename(args.csv), "mode": args.mode, "a": args.a, "b": args.b,
                "m": args.m, "n": args.n, "lb": args.lb}
    return result, settings


# ---------------------------------------------------------------------------
# parser


def _common(p):
    p.add_argument("--model", metavar="CFG", help="key=value configuration file")
    p.add_argument("--out", default="-", help="output path, '-' for standard output")
    p.add_argument("--quiet", action="store_true", help="suppress progress on stderr")
    p.add_argument("--svg", metavar="PATH", help="also write an SVG plot")
    p.add_argument("--threads", type=int, help="worker threads (default: TIPPINGSCOPE_THREADS or cores)")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")


def _periodic_flags(p):
    p.add_argument("--d", type=float)
    p.add_argument("--g-minus", type=float)
    p.add_argument("--g-plus", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tippingscope",
                 description="Bifurcations and tipping points of scalar concave-convex equations.")
    ap.add_argument("--version", action="version", version=f"tippingscope {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    win = f"{DEFAULT_WINDOW[0]:g},{DEFAULT_WINDOW[1]:g}"

    p = sub.add_parser("simulate", help="integrate one trajectory")
    _common(p)
    _periodic_flags(p)
    p.add_argument("--type", choices=["periodic", "allee", "transition"])
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--split", choices=["full", "minus", "plus"], default="full")
    p.add_argument("--rho", type=float)
    p.add_argument("--omega", type=float, default=0.0, help="frozen angle for --type allee")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=2 * math.pi)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--x-guard", type=float, default=1e7)
    p.add_argument("--samples", type=int, default=201)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("poincare", help="fixed points of the period map")
    _common(p)
    _periodic_flags(p)
    p.add_argument("--lambda", dest="lam", help="number, mu_plus or mu_minus")
    p.add_argument("--split", choices=["full", "minus", "plus"], default="full")
    p.add_argument("--window", default=win)
    p.add_argument("--n-scan", type=int, default=DEFAULT_N_SCAN)
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("mu", help="mu thresholds of the linear family")
    _common(p)
    p.add_argument("--d", type=float)
    p.add_argument("--c", default="cosine", help="'cosine' or a constant value")
    p.add_argument("--omega-grid", type=int, default=100)
    p.set_defaults(func=cmd_mu)

    p = sub.add_parser("lambda", help="saddle-node values of the split families")
    _common(p)
    _periodic_flags(p)
    p.add_argument("--search", default="-2,2")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--window", default=win)
    p.add_argument("--n-scan", type=int, default=DEFAULT_N_SCAN)
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("classify-order", help="ordering case O1-O5")
    _common(p)
    _periodic_flags(p)
    p.add_argument("--window", default=win)
    p.add_argument("--n-scan", type=int, default=DEFAULT_N_SCAN)
    p.add_argument("--omega-grid", type=int, default=100)
    p.set_defaults(func=cmd_classify_order)

    p = sub.add_parser("band", help="inflection curve and d-concavity band")
    _common(p)
    p.add_argument("--omega-grid", type=int, default=100)
    p.add_argument("--x-max", type=float, default=50.0)
    p.set_defaults(func=cmd_band)

    p = sub.add_parser("region-map", help="root/concavity classes over (K, Delta)")
    _common(p)
    p.add_argument("--grid", default="100x100")
    p.add_argument("--K-range", dest="k_range", default="38.3,40.3")
    p.add_argument("--D-range", dest="d_range", default="38.2,40.2")
    p.set_defaults(func=cmd_region_map)

    p = sub.add_parser("tipping", help="tracking/tipping threshold in rho")
    _common(p)
    p.add_argument("--bracket", default="0,1")
    p.add_argument("--classify", metavar="RHO[,RHO...]", help="classify these values only")
    p.add_argument("--horizon", type=float, default=1e6)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--int-tol", type=float, default=TRANSITION_CONFIG.rel_tol)
    p.add_argument("--no-early-exit", action="store_true")
    p.add_argument("--trace-svg", metavar="PATH")
    p.add_argument("--trace-window", type=lambda s: _pair(s, "--trace-window"), default=(-100.0, 400.0))
    p.set_defaults(func=cmd_tipping, rho=None)

    p = sub.add_parser("fit", help="concave-convex regression spline")
    _common(p)
    p.add_argument("--csv", required=True)
    p.add_argument("--mode", choices=["generations", "direct"])
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lb", type=float, default=0.0)
    p.add_argument("--plot", metavar="PATH", help="alias of --svg")
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args.model) if args.model else {}
        run = Run(args, config)
        result, settings = args.func(args, run)
        if args.command == "region-map" and "csv" in result:
            _write_text(args.out, result["csv"])
        else:
            run.finish(result, settings)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except TippingscopeError as e:
        print(f"tippingscope: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as e:
        print(f"tippingscope: invalid input: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"tippingscope: {e}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
