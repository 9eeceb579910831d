"""Concave-convex cubic regression splines.

The basis consists of ``C_0(x) = x`` plus cubic splines ``C_i`` whose second
derivatives are hat functions: positive on ``[0, a]`` (convex part) and
negative on ``[a, b]`` (concave part). Nonnegative coefficients on
``C_1 ... C_{m+n+2}`` make any combination convex on ``[0, a]`` and concave
on ``[a, b]``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, nnls

from .errors import InvalidGeometry, NonPositiveCurrentGeneration, OutOfDomain, RankDeficient

__all__ = [
    "SplineBasis",
    "SplineFit",
    "GrowthDataset",
    "build_basis",
    "eval_basis",
    "eval_spline",
    "ingest_generations",
    "read_dataset_csv",
    "fit",
    "spline_roots",
]

# relative slack for evaluation at the domain ends
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class SplineBasis:
    a: float
    b: float
    m: int
    n: int
    knots: np.ndarray  # (m+n+3,)
    hats: np.ndarray  # second-derivative values at the knots, (size, m+n+3)
    coef: np.ndarray  # cubic coefficients per knot interval, (size, m+n+2, 4)

    @property
    def size(self) -> int:
        return self.m + self.n + 3

    @property
    def h(self) -> float:
        return self.a / (self.m + 1)

    @property
    def h_tilde(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    @property
    def convex_indices(self) -> range:
        return range(1, self.m + 2)

    @property
    def concave_indices(self) -> range:
        return range(self.m + 2, self.m + self.n + 3)

    def second_derivative(self, i: int, x) -> np.ndarray:
        """Piecewise-linear ``C_i''`` at ``x``."""
        return np.interp(x, self.knots, self.hats[i])


def _hat_values(a, b, m, n):
    nk = m + n + 3
    h = a / (m + 1)
    ht = (b - a) / (n + 1)
    knots = np.empty(nk)
    knots[: m + 2] = np.arange(m + 2) * h
    knots[m + 1:] = a + np.arange(n + 2) * ht
    knots[m + 1] = a
    knots[-1] = b
    hats = np.zeros((nk, nk))
    hats[1, 0] = 2.0 / h
    for i in range(2, m + 2):
        hats[i, i - 1] = 1.0 / h
    for i in range(m + 2, m + n + 2):
        hats[i, i] = -1.0 / ht
    hats[m + n + 2, m + n + 2] = -2.0 / ht
    return knots, hats


def _integrate_twice(knots, hats, slope0):
    """Cubic coefficients (in the local variable ``s = x - t_k``) of the
    double integral of a piecewise-linear function, with ``C(0) = 0`` and
    ``C'(0) = slope0``."""
    npc = len(knots) - 1
    coef = np.empty((npc, 4))
    v, s = 0.0, slope0
    for k in range(npc):
        dt = knots[k + 1] - knots[k]
        m0, m1 = hats[k], hats[k + 1]
        c2 = 0.5 * m0
        c3 = (m1 - m0) / (6.0 * dt)
        coef[k] = (v, s, c2, c3)
        v = v + s * dt + c2 * dt * dt + c3 * dt ** 3
        s = s + 0.5 * (m0 + m1) * dt
    return coef


def build_basis(a: float, b: float, m: int, n: int) -> SplineBasis:
    """Knots and closed-form cubic pieces of ``C_0 ... C_{m+n+2}``."""
    if not (math.isfinite(a) and math.isfinite(b)) or not 0.0 < a < b:
        raise InvalidGeometry(f"need 0 < a < b, got a={a}, b={b}")
    if int(m) != m or int(n) != n or m < 0 or n < 0:
        raise InvalidGeometry(f"m and n must be nonnegative integers, got m={m}, n={n}")
    m, n = int(m), int(n)
    knots, hats = _hat_values(float(a), float(b), m, n)
    coef = np.stack([_integrate_twice(knots, hats[i], 1.0 if i == 0 else 0.0)
                     for i in range(len(knots))])
    for arr in (knots, hats, coef):
        arr.setflags(write=False)
    return SplineBasis(float(a), float(b), m, n, knots, hats, coef)


def _check_domain(basis, x):
    x = np.asarray(x, dtype=float)
    slack = _DOMAIN_SLACK * basis.b
    if np.any(~np.isfinite(x)) or np.any(x < -slack) or np.any(x > basis.b + slack):
        bad = x[~((x >= -slack) & (x <= basis.b + slack))]
        raise OutOfDomain(f"x={bad.ravel()[:3]} outside [0, {basis.b}]")
    return np.clip(x, 0.0, basis.b)


def eval_basis(basis: SplineBasis, x, deriv: int = 0) -> np.ndarray:
    """Matrix of ``C_i^{(deriv)}(x_j)`` with shape ``x.shape + (size,)``."""
    if deriv not in (0, 1, 2):
        raise ValueError("deriv must be 0, 1 or 2")
    x = _check_domain(basis, x)
    k = np.clip(np.searchsorted(basis.knots, x, side="right") - 1, 0, len(basis.knots) - 2)
    s = (x - basis.knots[k])[..., None]
    c = np.moveaxis(basis.coef[:, k, :], 0, -2)  # x.shape + (size, 4)
    c0, c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    if deriv == 0:
        return c0 + s * (c1 + s * (c2 + s * c3))
    if deriv == 1:
        return c1 + s * (2.0 * c2 + 3.0 * s * c3)
    return 2.0 * c2 + 6.0 * s * c3


@dataclass
class SplineFit:
    basis: SplineBasis
    alpha: np.ndarray
    sse: float
    active_set: List[int]
    lb: float = 0.0
    kkt_residual: float = 0.0

    @property
    def allee_threshold(self) -> Optional[float]:
        """Middle root of ``theta`` on ``[0, b]`` when there are exactly three
        (``theta(0) = 0`` always counts as the first)."""
        roots = spline_roots(self)
        return roots[0] if len(roots) == 2 else None

    def to_dict(self):
        roots = spline_roots(self)
        return {
            "knots": self.basis.knots.tolist(),
            "alpha": self.alpha.tolist(),
            "sse": self.sse,
            "lb": self.lb,
            "active_set": list(self.active_set),
            "kkt_residual": self.kkt_residual,
            "roots": roots,
            "allee_threshold": roots[0] if len(roots) == 2 else None,
        }


def eval_spline(fit: "SplineFit", x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``theta``, ``theta'`` and ``theta''`` at ``x`` (scalar or array)."""
    scalar = np.ndim(x) == 0
    out = tuple(eval_basis(fit.basis, x, k) @ fit.alpha for k in range(3))
    if scalar:
        return tuple(float(v) for v in out)
    return out


@dataclass
class GrowthDataset:
    x: np.ndarray
    y: np.ndarray
    provenance: Optional[List[Tuple[float, float]]] = None
    excluded_rows: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).ravel()
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have the same length")
        if np.any(self.x < 0) or not np.all(np.isfinite(self.x)) or not np.all(np.isfinite(self.y)):
            raise ValueError("points must be finite with x >= 0")

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    def __len__(self):
        return len(self.x)


def ingest_generations(rows: Iterable[Sequence[float]]) -> GrowthDataset:
    """Turn ``(P_t, P_{t+1})`` pairs into ``(P_t, P_t log(P_{t+1}/P_t))``.

    Rows whose next generation is extinct are dropped and counted.
    """
    xs, ys, kept = [], [], []
    dropped = 0
    for j, (p, p1) in enumerate(rows):
        p, p1 = float(p), float(p1)
        if not p > 0:
            raise NonPositiveCurrentGeneration(f"row {j}: current generation {p} is not positive")
        if p1 == 0:
            dropped += 1
            continue
        if p1 < 0 or not math.isfinite(p1):
            raise ValueError(f"row {j}: invalid next generation {p1}")
        xs.append(p)
        ys.append(p * math.log(p1 / p))
        kept.append((p, p1))
    return GrowthDataset(np.array(xs), np.array(ys), kept, dropped)


def read_dataset_csv(path: str, mode: Optional[str] = None) -> GrowthDataset:
    """Read ``p_t,p_t1`` (generations) or ``x,y`` (direct) columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = [c.strip() for c in (reader.fieldnames or [])]
        reader.fieldnames = cols
        if mode is None:
            mode = "generations" if {"p_t", "p_t1"} <= set(cols) else "direct"
        need = ("p_t", "p_t1") if mode == "generations" else ("x", "y")
        if not set(need) <= set(cols):
            raise ValueError(f"{path}: {mode} mode needs columns {','.join(need)}, found {cols}")
        rows = [(float(r[need[0]]), float(r[need[1]])) for r in reader]
    if mode == "generations":
        return ingest_generations(rows)
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return GrowthDataset(arr[:, 0], arr[:, 1])


def _canonical_order(x, y):
    return np.lexsort((y, x))


def fit(basis: SplineBasis, data: GrowthDataset, lb: float = 0.0) -> SplineFit:
    """Least squares ``theta = sum alpha_i C_i`` with ``alpha_i >= lb`` for
    ``i >= 1`` and ``alpha_0`` free.

    Rows are put in a canonical order first, so permuting the dataset does
    not change the result.
    """
    if len(data) == 0:
        raise RankDeficient("empty dataset")
    order = _canonical_order(data.x, data.y)
    x, y = data.x[order], data.y[order]
    A = eval_basis(basis, x)
    if np.linalg.matrix_rank(A) < basis.size:
        raise RankDeficient(f"design matrix has rank {np.linalg.matrix_rank(A)} < {basis.size}")

    # shift alpha_i = lb + beta_i so the bound becomes beta_i >= 0
    c0, B = A[:, 0], A[:, 1:]
    ys = y - lb * B.sum(axis=1)
    # project out the free C_0 column
    q = c0 / np.linalg.norm(c0)
    Bp = B - np.outer(q, q @ B)
    yp = ys - q * (q @ ys)
    beta, _ = nnls(Bp, yp, maxiter=50 * basis.size)

    # polish: exact least squares on the passive set, kept if still feasible;
    # entries at roundoff level count as sitting on the bound
    passive = beta > 1e-13 * max(1.0, float(np.max(beta, initial=0.0)))
    sol, *_ = np.linalg.lstsq(np.column_stack([c0, B[:, passive]]), ys, rcond=None)
    if np.all(sol[1:] > 0):
        beta = np.zeros_like(beta)
        beta[passive] = sol[1:]
        a0 = sol[0]
    else:
        beta = np.where(passive, beta, 0.0)
        a0 = float(q @ (ys - B @ beta)) / np.linalg.norm(c0)

    alpha = np.concatenate([[a0], lb + beta])
    resid = A @ alpha - y
    sse = float(resid @ resid)
    grad = A.T @ resid
    active = [i + 1 for i in range(len(beta)) if beta[i] == 0]
    scale = np.linalg.norm(A, axis=0) * (np.linalg.norm(y) + 1.0)
    g = grad / scale
    free = np.ones(basis.size, dtype=bool)
    free[active] = False
    kkt = max(float(np.max(np.abs(g[free]), initial=0.0)),
              float(np.max(-g[~free], initial=0.0)))
    return SplineFit(basis, alpha, sse, active, float(lb), kkt)


def spline_roots(fit: SplineFit, n_grid: int = 1000, xtol: float = 1e-10) -> List[float]:
    """Ascending roots of ``theta`` on ``(0, b]``, found by a grid scan."""
    b = fit.basis.b
    xs = np.linspace(0.0, b, n_grid + 1)[1:]
    vals = eval_basis(fit.basis, xs) @ fit.alpha

    def theta(x):
        return float(eval_basis(fit.basis, x) @ fit.alpha)

    roots = []
    for i in range(len(xs)):
        if vals[i] == 0.0:
            roots.append(float(xs[i]))
        elif i + 1 < len(xs) and vals[i] * vals[i + 1] < 0:
            roots.append(brentq(theta, xs[i], xs[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    return roots
