"""Period maps of 2*pi-periodic scalar equations and their fixed points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from ._roots import refine, sign_brackets
from .errors import Divergence, WindowTooSmall
from .odeint import IntegratorConfig, ScalarField, flow_batch, integrate

__all__ = [
    "FixedPoint",
    "FixedPointSet",
    "period_map",
    "period_map_batch",
    "period_map_derivative",
    "find_fixed_points",
]

TWO_PI = 2.0 * math.pi
FP_TOL = 1e-10
MULT_TOL = 1e-6
DEFAULT_WINDOW = (-30.0, 30.0)
DEFAULT_N_SCAN = 200


@dataclass(frozen=True)
class FixedPoint:
    x: float
    multiplier: float
    stability: str  # "Attractive" | "Repulsive" | "Neutral"

    def to_dict(self):
        return {"x": self.x, "multiplier": self.multiplier, "stability": self.stability}


@dataclass
class FixedPointSet:
    points: List[FixedPoint]
    window: Tuple[float, float]
    anomaly: bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def count(self):
        return len(self.points)

    @property
    def count_label(self):
        return str(self.count) if self.count <= 2 else "More"

    def to_dict(self):
        return {
            "count": self.count,
            "count_label": self.count_label,
            "points": [p.to_dict() for p in self.points],
            "scan_window": list(self.window),
            "anomaly": self.anomaly,
            "notes": list(self.notes),
        }


def classify_multiplier(mult, mult_tol=MULT_TOL):
    if mult < 1.0 - mult_tol:
        return "Attractive"
    if mult > 1.0 + mult_tol:
        return "Repulsive"
    return "Neutral"


def period_map(f: ScalarField, x0: float, cfg: IntegratorConfig = IntegratorConfig(),
               period: float = TWO_PI) -> float:
    """Value at ``t = period`` of the solution through ``(0, x0)``.

    Divergence within the period is reported as ``+inf`` or ``-inf``.
    """
    traj = integrate(f, 0.0, x0, period, cfg)
    if traj.blowup is not None:
        return math.copysign(math.inf, traj.blowup.direction)
    return traj.x_final


def period_map_batch(f: ScalarField, xs, cfg: IntegratorConfig = IntegratorConfig(),
                     period: float = TWO_PI) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if f.rhs_batch is not None:
        out, _ = flow_batch(f.rhs_batch, 0.0, xs, period, cfg)
        return out
    return np.array([period_map(f, float(x), cfg, period) for x in xs])


def period_map_derivative(f: ScalarField, x0: float, cfg: IntegratorConfig = IntegratorConfig(),
                          period: float = TWO_PI) -> float:
    """``T'(x0) = exp(int_0^period f_x(s, x(s)) ds)`` along the dense solution."""
    traj = integrate(f, 0.0, x0, period, cfg)
    if traj.blowup is not None:
        raise Divergence(f"solution from x0={x0} escapes at t={traj.blowup.t_escape}",
                         traj.blowup.t_escape, traj.blowup.direction)
    return math.exp(traj.quad(f.d1, 0.0, period))


def _displacement(f, cfg, period):
    def G(x):
        return period_map(f, x, cfg, period) - x
    return G


def _extremum(G, a, b, concave, xatol):
    """Location and value of the max (concave) or min (convex) of G on [a, b]."""
    sgn = -1.0 if concave else 1.0
    res = minimize_scalar(lambda x: sgn * G(x), bounds=(a, b), method="bounded",
                          options={"xatol": xatol})
    return float(res.x), float(sgn * res.fun)


def find_fixed_points(f: ScalarField, window=DEFAULT_WINDOW, n_scan: int = DEFAULT_N_SCAN,
                      cfg: IntegratorConfig = IntegratorConfig(), period: float = TWO_PI,
                      fp_tol: float = FP_TOL, mult_tol: float = MULT_TOL,
                      shape: Optional[str] = None) -> FixedPointSet:
    """Fixed points of the period map inside ``window``.

    ``G(x) = T(x) - x`` is sampled on a uniform grid and every sign change is
    refined to ``fp_tol``. For concave (convex) maps, declared through
    ``shape`` or ``f.shape``, a negative (positive) grid maximum (minimum) is
    additionally refined to catch a pair of roots, or a tangency, between two
    grid nodes.
    """
    if n_scan < 16:
        raise ValueError("n_scan must be at least 16")
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError("empty window")
    shape = shape if shape is not None else f.shape
    xs = np.linspace(lo, hi, n_scan)
    T = period_map_batch(f, xs, cfg, period)
    with np.errstate(invalid="ignore"):
        Gv = T - xs
    G = _displacement(f, cfg, period)
    exact, brackets = sign_brackets(xs, Gv)
    roots = list(exact)
    for i, a, b in brackets:
        roots.append(refine(G, a, b, float(Gv[i]), float(Gv[i + 1]), fp_tol))
    notes = []

    neutral = set()
    if shape in ("concave", "convex") and not roots:
        concave = shape == "concave"
        # sign of G away from its extremum; roots need the extremum to cross 0
        outside = -1.0 if concave else 1.0
        if np.all(np.sign(Gv) == -outside):
            raise WindowTooSmall(
                f"G keeps the sign {-outside:+.0f} on the whole window [{lo}, {hi}]; "
                "fixed points may lie outside")
        finite = np.isfinite(Gv)
        k = int(np.argmax(np.where(finite, Gv, -np.inf)) if concave
                else np.argmin(np.where(finite, Gv, np.inf)))
        if k in (0, n_scan - 1):
            raise WindowTooSmall(
                f"extremum of G at the window edge x={xs[k]}; widen [{lo}, {hi}]")
        a, b = float(xs[k - 1]), float(xs[k + 1])
        xm, gm = _extremum(G, a, b, concave, xatol=1e-3 * fp_tol)
        if abs(gm) <= fp_tol:
            roots.append(xm)
            neutral.add(xm)
            notes.append("tangency: extremum of T(x)-x within fp_tol of 0")
        elif gm * outside < 0:
            roots.append(refine(G, a, xm, None, gm, fp_tol))
            roots.append(refine(G, xm, b, gm, None, fp_tol))
            notes.append("root pair resolved between two scan nodes")

    roots.sort()
    points = []
    for x in roots:
        mult = period_map_derivative(f, x, cfg, period)
        stab = "Neutral" if x in neutral else classify_multiplier(mult, mult_tol)
        points.append(FixedPoint(float(x), mult, stab))
    anomaly = shape in ("concave", "convex") and len(points) > 2
    if anomaly:
        notes.append("more than two fixed points for a concave/convex map")
    return FixedPointSet(points, (lo, hi), anomaly, notes)
