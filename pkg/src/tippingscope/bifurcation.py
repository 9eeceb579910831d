"""Special parameter values and structural classifications.

Covers the bounded solution of the linear family, the thresholds
``mu_minus``/``mu_plus`` where it changes sign, the saddle-node values
``lambda_minus``/``lambda_plus`` of the split families, the ordering case
(O1..O5), the inflection curve of the Allee model, root/concavity region maps
and the d-concavity band.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy.optimize import brentq, minimize_scalar

from .errors import Ambiguous, BadBracket, NoBracket, NonDecayingKernel
from .models import AlleePredationModel, Decomposition, PeriodicModel, make_decomposition
from .odeint import IntegratorConfig, ScalarField
from .poincare import DEFAULT_N_SCAN, DEFAULT_WINDOW, find_fixed_points

__all__ = [
    "MuPair",
    "LambdaPair",
    "OrderCase",
    "InflectionCurve",
    "RegionClass",
    "DConcavityBand",
    "bounded_linear_solution",
    "mu_cosine_closed_form",
    "compute_mu",
    "find_lambda_pair",
    "classify_order",
    "inflection_curve",
    "classify_region",
    "region_map",
    "allee_decomposition",
    "dconcavity_band",
]

TWO_PI = 2.0 * math.pi
KERNEL_DECAY = 1e-13


# ---------------------------------------------------------------------------
# bounded solution of x' = d(t) x + c(t) + lam

_GL_N = 16


@lru_cache(maxsize=None)
def _gl_rule(n=_GL_N):
    """Gauss-Legendre nodes/weights on [-1, 1] and the matrix that maps
    values at the nodes to integrals from -1 up to each node."""
    z, w = legendre.leggauss(n)
    V = legendre.legvander(z, n - 1)
    coef = np.linalg.inv(V)  # node values -> Legendre coefficients
    A = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        anti = legendre.legint(e, lbnd=-1.0)
        A[:, k] = legendre.legval(z, anti)
    return z, w, A @ coef


def _as_vec(func, u):
    return np.broadcast_to(np.asarray(func(u), dtype=float), u.shape)


def _kernel_nodes(d, t, horizon, width):
    """Quadrature nodes ``s = t + u`` on ``[t, t + horizon]``, weights, and
    ``D(u) = int_t^{t+u} d``."""
    z, w, Wint = _gl_rule()
    n_pan = max(1, int(math.ceil(horizon / width)))
    edges = np.linspace(0.0, horizon, n_pan + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    u = mid[:, None] + half[:, None] * z[None, :]
    dv = _as_vec(d, t + u)
    panel_int = half * (dv @ w)
    start = np.concatenate([[0.0], np.cumsum(panel_int)[:-1]])
    D = start[:, None] + half[:, None] * (dv @ Wint.T)
    D_end = float(start[-1] + panel_int[-1])
    weights = half[:, None] * w[None, :]
    return u.ravel(), weights.ravel(), D.ravel(), D_end


def _kernel_integrals(c, d, t, horizon, width):
    u, wts, D, D_end = _kernel_nodes(d, t, horizon, width)
    ker = np.exp(-D) * wts
    cv = _as_vec(c, t + u)
    return float(ker @ cv), float(ker.sum()), D_end, float(np.max(np.abs(cv)))


def _adaptive_kernel_integrals(c, d, t, horizon, rtol=1e-14):
    width = 2.0
    prev = _kernel_integrals(c, d, t, horizon, width)
    for _ in range(8):
        width *= 0.5
        cur = _kernel_integrals(c, d, t, horizon, width)
        if (abs(cur[0] - prev[0]) <= rtol * (1 + abs(cur[0]))
                and abs(cur[1] - prev[1]) <= rtol * (1 + abs(cur[1]))):
            return cur
        prev = cur
    return cur


def _mean_rate(d, t, span=200.0, n=4001):
    s = np.linspace(t, t + span, n)
    return float(np.mean(_as_vec(d, s)))


def default_horizon(d, t=0.0):
    """Truncation length with ``exp(-mean(d) * horizon) < 1e-13``."""
    dbar = _mean_rate(d, t)
    if not dbar > 0:
        raise NonDecayingKernel(f"sampled mean of d is {dbar:.3g}, not positive")
    return -math.log(KERNEL_DECAY) / dbar


def bounded_linear_solution(c, d, lam, t, horizon=None):
    """Unique bounded solution of ``x' = d(t) x + c(t) + lam`` at time ``t``.

    ``b(t) = -int_t^{t+H} exp(int_s^t d) (c(s) + lam) ds``. Returns
    ``(value, truncation_bound)``, the bound being
    ``exp(-D(H)) * max|c + lam| / mean(d)``.
    ``c`` and ``d`` must accept numpy arrays.
    """
    if horizon is None:
        horizon = default_horizon(d, t)
    Ic, I1, D_end, cmax = _adaptive_kernel_integrals(c, d, t, horizon)
    decay = math.exp(-D_end)
    if decay > 1e-12:
        raise NonDecayingKernel(
            f"kernel decays only to {decay:.3g} over horizon {horizon}")
    value = -(Ic + lam * I1)
    dbar = D_end / horizon
    bound = decay * (cmax + abs(lam)) / dbar
    return value, bound


# ---------------------------------------------------------------------------
# mu thresholds


@dataclass(frozen=True)
class MuPair:
    mu_minus: float
    mu_plus: float
    method: str  # "Quadrature" | "ClosedFormCosine"

    def to_dict(self):
        return {"mu_minus": self.mu_minus, "mu_plus": self.mu_plus, "method": self.method}


def mu_cosine_closed_form(d):
    """``mu_minus = -mu_plus = d / sqrt(d^2 + 1)`` for ``c = cos``, constant ``d``."""
    v = d / math.sqrt(d * d + 1.0)
    return MuPair(v, -v, "ClosedFormCosine")


def _mu_ratio(c, d, horizon):
    def ratio(w):
        Ic, I1, _, _ = _adaptive_kernel_integrals(c, d, w, horizon)
        return Ic / I1
    return ratio


def compute_mu(c, d, omega_grid=None, horizon=None, xtol=1e-8) -> MuPair:
    """Thresholds where the bounded linear solution changes sign.

    ``mu_minus = -min_w R(w)`` and ``mu_plus = -max_w R(w)`` with ``R`` the
    kernel-weighted average of ``c`` started at phase ``w``. The extrema are
    located on ``omega_grid`` and polished with a bounded scalar search.
    """
    if omega_grid is None:
        omega_grid = np.linspace(0.0, TWO_PI, 101)[:-1]
    grid = np.asarray(omega_grid, dtype=float)
    if horizon is None:
        horizon = max(default_horizon(d, float(w)) for w in grid[:: max(1, len(grid) // 8)])
    R = _mu_ratio(c, d, horizon)
    vals = np.array([R(float(w)) for w in grid])
    step = float(np.max(np.diff(grid))) if len(grid) > 1 else 1.0

    def polish(k, sgn):
        a, b = grid[k] - step, grid[k] + step
        res = minimize_scalar(lambda w: sgn * R(w), bounds=(a, b), method="bounded",
                              options={"xatol": xtol})
        return min(sgn * vals[k], float(res.fun)) * sgn

    rmin = polish(int(np.argmin(vals)), 1.0)
    rmax = polish(int(np.argmax(vals)), -1.0)
    return MuPair(-rmin, -rmax, "Quadrature")


# ---------------------------------------------------------------------------
# lambda thresholds and ordering cases


@dataclass(frozen=True)
class LambdaPair:
    lambda_minus: float
    lambda_plus: float
    bracket_width: float

    def to_dict(self):
        return {"lambda_minus": self.lambda_minus, "lambda_plus": self.lambda_plus,
                "bracket_width": self.bracket_width}


def _count(model, split, lam, window, n_scan, cfg):
    f = model.with_split(split).with_lambda(lam).field
    return find_fixed_points(f, window, n_scan, cfg).count


def _bisect_count(model, split, lo, hi, tol, window, n_scan, cfg):
    """Boundary between the 0 and 2 fixed-point regimes of one split."""
    c_lo = _count(model, split, lo, window, n_scan, cfg)
    c_hi = _count(model, split, hi, window, n_scan, cfg)
    want = (0, 2) if split == "minus" else (2, 0)
    if (c_lo, c_hi) != want:
        raise BadBracket(
            f"{split} split: counts {c_lo} at {lo} and {c_hi} at {hi}, expected {want}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        c = _count(model, split, mid, window, n_scan, cfg)
        # a tangency (count 1) belongs to the side with fixed points
        if (c > 0) == (split == "minus"):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi), hi - lo


def find_lambda_pair(model: PeriodicModel, search=(-2.0, 2.0), tol=1e-8,
                     window=DEFAULT_WINDOW, n_scan=DEFAULT_N_SCAN,
                     cfg: IntegratorConfig = IntegratorConfig()) -> LambdaPair:
    """Saddle-node values of the concave-linear (``lambda_minus``) and
    linear-convex (``lambda_plus``) splits by bisection on fixed-point counts."""
    lo, hi = float(search[0]), float(search[1])
    if not hi > lo:
        raise BadBracket("empty search interval")
    lm, wm = _bisect_count(model, "minus", lo, hi, tol, window, n_scan, cfg)
    lp, wp = _bisect_count(model, "plus", lo, hi, tol, window, n_scan, cfg)
    return LambdaPair(lm, lp, max(wm, wp))


@dataclass(frozen=True)
class OrderCase:
    case: str
    evidence: dict

    def to_dict(self):
        return {"case": self.case, "evidence": dict(self.evidence)}


_TABLE = {(2, 2): "O1", (0, 2): "O2", (2, 0): "O3"}


def classify_order(d, g_minus, g_plus, window=DEFAULT_WINDOW, n_scan=DEFAULT_N_SCAN,
                   cfg: IntegratorConfig = IntegratorConfig(), omega_grid=100,
                   mu: Optional[MuPair] = None) -> OrderCase:
    """Ordering of lambda_-, lambda^+, mu_-, mu^+ for the cosine family.

    Counts of ``T^-`` at ``mu_plus`` and ``T^+`` at ``mu_minus`` pick O1-O3;
    the (0, 0) row is split into O4/O5 by the counts of both maps at
    ``lambda = 0``.
    """
    model = PeriodicModel(d, g_minus, g_plus)
    if mu is None:
        grid = np.linspace(0.0, TWO_PI, int(omega_grid) + 1)[:-1]
        mu = compute_mu(np.cos, lambda s: d, grid)
    n_minus = _count(model, "minus", mu.mu_plus, window, n_scan, cfg)
    n_plus = _count(model, "plus", mu.mu_minus, window, n_scan, cfg)
    evidence = {"mu_minus": mu.mu_minus, "mu_plus": mu.mu_plus,
                "fix_T_minus_at_mu_plus": n_minus, "fix_T_plus_at_mu_minus": n_plus}
    key = (n_minus, n_plus)
    if key in _TABLE:
        return OrderCase(_TABLE[key], evidence)
    if key == (0, 0):
        z_minus = _count(model, "minus", 0.0, window, n_scan, cfg)
        z_plus = _count(model, "plus", 0.0, window, n_scan, cfg)
        evidence.update(fix_T_minus_at_0=z_minus, fix_T_plus_at_0=z_plus)
        if (z_minus, z_plus) == (2, 2):
            return OrderCase("O4", evidence)
        if (z_minus, z_plus) == (0, 0):
            return OrderCase("O5", evidence)
    raise Ambiguous(f"fixed-point counts {evidence} match no ordering case", evidence)


# ---------------------------------------------------------------------------
# Allee model: inflection curve, regions, band


@dataclass
class InflectionCurve:
    omega: np.ndarray
    b: np.ndarray
    h_y: np.ndarray
    h_yyy: np.ndarray
    failures: List[float] = field(default_factory=list)

    def to_dict(self):
        return {"omega": self.omega.tolist(), "b": self.b.tolist(),
                "h_y": self.h_y.tolist(), "h_yyy": self.h_yyy.tolist(),
                "failures": list(self.failures)}


def inflection_curve(model: AlleePredationModel, omega_grid, y_max=50.0) -> InflectionCurve:
    """Root of ``h_yy(omega, .)`` on ``(0, y_max]`` for each grid angle, with
    ``h_y`` and ``h_yyy`` evaluated on it. Angles without a bracket are
    listed in ``failures`` and hold NaN."""
    om = np.asarray(omega_grid, dtype=float)
    b = np.full(om.shape, np.nan)
    failures = []
    for i, w in enumerate(om):
        try:
            b[i] = model.inflection(float(w), y_max)
        except NoBracket:
            failures.append(float(w))
    hy = np.array([model.h_y(float(w), y) if np.isfinite(y) else np.nan for w, y in zip(om, b)])
    hyyy = np.array([model.h_yyy(float(w), y) if np.isfinite(y) else np.nan for w, y in zip(om, b)])
    return InflectionCurve(om, b, hy, hyyy, failures)


@dataclass(frozen=True)
class RegionClass:
    n_roots: int
    concave_convex: bool
    d_concave: bool
    near_degenerate: bool = False

    def to_dict(self):
        return {"n_roots": self.n_roots, "concave_convex": self.concave_convex,
                "d_concave": self.d_concave, "near_degenerate": self.near_degenerate}


def _classify_rows(model, K, Deltas, ys, degenerate_tol):
    """Vectorised classification of ``h(., K, Delta)`` for several Deltas."""
    D = np.asarray(Deltas, dtype=float)[:, None]
    h, _, hyy, hyyy = model.derivs_kd(ys[None, :], K, D)
    out = []
    for hr, yyr, yyyr in zip(h, hyy, hyyy):
        s = np.sign(hr)
        n_roots = np.count_nonzero(s == 0) + np.count_nonzero(s[:-1] * s[1:] < 0)
        syy = np.sign(yyr)
        changes = np.flatnonzero(syy[:-1] * syy[1:] < 0)
        cc = (np.count_nonzero(syy == 0) == 0 and changes.size == 1
              and syy[changes[0]] > 0)
        dconc = bool(np.all(yyyr <= 0))
        # a local extremum of h near zero: a root pair is about to appear or vanish
        inner = hr[1:-1]
        ext = (np.sign(inner - hr[:-2]) * np.sign(hr[2:] - inner)) < 0
        near = bool(np.any(np.abs(inner[ext]) < degenerate_tol))
        out.append(RegionClass(int(n_roots), bool(cc), dconc, near))
    return out


def classify_region(model: AlleePredationModel, K, Delta, probe=(0.0, 60.0), n=6001,
                    degenerate_tol=1e-10) -> RegionClass:
    """Root count, concave-convex and d-concavity flags of ``y -> h`` at
    fixed ``(K, Delta)`` on the probe interval."""
    ys = np.linspace(probe[0], probe[1], n)
    return _classify_rows(model, float(K), [Delta], ys, degenerate_tol)[0]


def region_map(model: AlleePredationModel, K_range=(38.3, 40.3), D_range=(38.2, 40.2),
               grid=(100, 100), probe=(0.0, 60.0), n=6001, threads=1):
    """Classify every cell centre of a ``grid`` over ``K_range x D_range``.

    Returns ``(Ks, Ds, classes)`` with ``classes[i][j]`` for ``(Ks[i], Ds[j])``.
    """
    nK, nD = grid
    Ks = _centres(K_range, nK)
    Ds = _centres(D_range, nD)
    ys = np.linspace(probe[0], probe[1], n)

    def row(K):
        return _classify_rows(model, float(K), Ds, ys, 1e-10)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            classes = list(ex.map(row, Ks))
    else:
        classes = [row(K) for K in Ks]
    return Ks, Ds, classes


def _centres(rng, n):
    a, b = rng
    w = (b - a) / n
    return a + w * (np.arange(n) + 0.5)


def allee_decomposition(model: AlleePredationModel) -> Decomposition:
    """Decomposition of ``h(omega, .)`` about the inflection curve, in the
    angle variable (the time derivative of the pivot is not included)."""
    f = ScalarField(rhs=model.h, d1=model.h_y, d2=model.h_yy, d3=model.h_yyy)
    pivot = lru_cache(maxsize=4096)(model.inflection)
    return make_decomposition(f, pivot, pivot_dot=lambda w: 0.0)


@dataclass
class DConcavityBand:
    omega_grid: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    alpha_star: np.ndarray
    beta_star: np.ndarray

    def contains(self, i, x, strict=False):
        lo = self.alpha_star[i] if strict else self.alpha[i]
        hi = self.beta_star[i] if strict else self.beta[i]
        return lo <= x <= hi

    def to_dict(self):
        return {"omega": self.omega_grid.tolist(), "alpha": self.alpha.tolist(),
                "beta": self.beta.tolist(), "alpha_star": self.alpha_star.tolist(),
                "beta_star": self.beta_star.tolist()}


def _band_edge(g3, side, x_max, n, threshold):
    """Outward scan from 0: farthest x on ``side`` with ``g3 <= threshold``
    on the grid between 0 and x, refined on the violating cell."""
    xs = side * x_max * np.arange(1, n + 1) / n
    prev = 0.0
    for x in xs:
        if g3(float(x)) > threshold:
            f = lambda s: g3(s) - threshold
            fa, fb = f(prev), f(float(x))
            if fa <= 0 < fb and prev != x:
                if fa == 0:
                    return prev
                a, b = sorted((prev, float(x)))
                return brentq(f, a, b, xtol=1e-12)
            return prev
        prev = float(x)
    return float(side * x_max)


def dconcavity_band(dec: Decomposition, omega_grid, x_max=50.0, n=2000,
                    margin=1e-12) -> DConcavityBand:
    """Band around ``x = 0`` where ``g_x(omega, .)`` is concave.

    ``alpha``/``beta`` bound the interval on which ``g_xxx <= 0``;
    the starred edges require ``g_xxx < -margin`` away from the origin.
    Unbounded sides are capped at ``+-x_max``.
    """
    if dec.g_xxx is None:
        raise ValueError("decomposition lacks a third derivative")
    om = np.asarray(omega_grid, dtype=float)
    out = {k: np.empty(om.shape) for k in ("a", "b", "as", "bs")}
    for i, w in enumerate(om):
        g3 = lambda x, w=float(w): dec.g_xxx(w, x)
        # concavity must hold at the origin itself for a nonempty band
        ok0 = g3(0.0) <= 0
        out["a"][i] = _band_edge(g3, -1, x_max, n, 0.0) if ok0 else 0.0
        out["b"][i] = _band_edge(g3, +1, x_max, n, 0.0) if ok0 else 0.0
        out["as"][i] = _band_edge(g3, -1, x_max, n, -margin)
        out["bs"][i] = _band_edge(g3, +1, x_max, n, -margin)
    # the strict band sits inside the plain one by definition
    alpha_s = np.maximum(out["as"], out["a"])
    beta_s = np.minimum(out["bs"], out["b"])
    return DConcavityBand(om, out["a"], out["b"], alpha_s, beta_s)
