"""Adaptive Dormand-Prince 5(4) integration of scalar nonautonomous ODEs.

The scalar path (:func:`integrate`) is written with plain floats because it
runs for up to ~10^6 time units in the transition experiments; the batch
path (:func:`flow_batch`) advances many initial states at a shared time grid
and is what period-map scans use.
"""

from __future__ import annotations

import math
from array import array
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NonFiniteEvaluation, OutOfRange, StepUnderflow

__all__ = [
    "ScalarField",
    "IntegratorConfig",
    "BlowUp",
    "Trajectory",
    "step_embedded",
    "integrate",
    "sample",
    "flow_batch",
]

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_A71, _A73, _A74, _A75, _A76 = (
    35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
# fifth minus fourth order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension (Hairer, Norsett & Wanner, dopri5)
_D1, _D3, _D4, _D5, _D6, _D7 = (
    -12715105075 / 11282082432, 87487479700 / 32700410799,
    -10690763975 / 1880347072, 701980252875 / 199316789632,
    -1453857185 / 822651844, 69997945 / 29380423)

# PI controller constants
_SAFE = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MAX = 10.0
_FAC_MIN = 0.2


@dataclass(frozen=True)
class ScalarField:
    """Right-hand side ``f(t, x)`` with its x-derivatives.

    ``rhs_batch(t, xs)`` is an optional numpy version of ``rhs`` used by
    :func:`flow_batch`; ``shape`` marks fields known to generate concave or
    convex period maps (``"concave"``, ``"convex"`` or ``None``).
    """

    rhs: Callable[[float, float], float]
    d1: Callable[[float, float], float]
    d2: Optional[Callable[[float, float], float]] = None
    d3: Optional[Callable[[float, float], float]] = None
    rhs_batch: Optional[Callable] = None
    shape: Optional[str] = None


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-13
    h_max: float = math.inf
    x_guard: float = 1e7
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if not self.x_guard > 0:
            raise ValueError("x_guard must be positive")


@dataclass(frozen=True)
class BlowUp:
    t_escape: float
    direction: int  # +1 towards +inf, -1 towards -inf


def _stages(rhs, t, x, h, k1):
    k2 = rhs(t + _C2 * h, x + h * _A21 * k1)
    k3 = rhs(t + _C3 * h, x + h * (_A31 * k1 + _A32 * k2))
    k4 = rhs(t + _C4 * h, x + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
    k5 = rhs(t + _C5 * h, x + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
    k6 = rhs(t + h, x + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
    x1 = x + h * (_A71 * k1 + _A73 * k3 + _A74 * k4 + _A75 * k5 + _A76 * k6)
    k7 = rhs(t + h, x1)
    err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
    return x1, err, k3, k4, k5, k6, k7


def step_embedded(f, t, x, h):
    """Take one Dormand-Prince step of size ``h`` from ``(t, x)``.

    Returns the fifth-order estimate and the difference between the fifth and
    fourth order estimates.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    k1 = f.rhs(t, x)
    if not math.isfinite(k1):
        raise NonFiniteEvaluation(f"rhs({t}, {x}) = {k1}")
    x1, err, _, _, _, _, k7 = _stages(f.rhs, t, x, h, k1)
    if not (math.isfinite(x1) and math.isfinite(err) and math.isfinite(k7)):
        raise NonFiniteEvaluation(f"non-finite stage value in step from t={t}")
    return x1, err


class Trajectory:
    """Accepted steps of a scalar integration with the dopri5 interpolant.

    Nodes are stored in integration order (decreasing times for backward
    runs). ``blowup`` is ``None`` for completed runs.
    """

    def __init__(self, t0, x0, direction):
        self.direction = direction
        self.t = array("d", [t0])
        self.x = array("d", [x0])
        self._r3 = array("d")
        self._r4 = array("d")
        self._r5 = array("d")
        self.blowup: Optional[BlowUp] = None
        self.stopped = False
        self.n_rejected = 0

    @property
    def completed(self):
        return self.blowup is None

    @property
    def t_start(self):
        return self.t[0]

    @property
    def t_final(self):
        """Last time covered by the dense output."""
        return self.blowup.t_escape if self.blowup else self.t[-1]

    @property
    def x_final(self):
        return self.x[-1]

    @property
    def n_steps(self):
        return len(self.t) - 1

    def span(self):
        a, b = self.t_start, self.t_final
        return (a, b) if a <= b else (b, a)

    def _append(self, t1, x1, r3, r4, r5):
        self.t.append(t1)
        self.x.append(x1)
        self._r3.append(r3)
        self._r4.append(r4)
        self._r5.append(r5)

    def _locate(self, t):
        lo, hi = self.span()
        if not (lo <= t <= hi):
            raise OutOfRange(f"t={t} outside [{lo}, {hi}]")
        n = len(self.t)
        if self.direction > 0:
            k = bisect_right(self.t, t) - 1
        else:
            # times are decreasing; search on the reversed key
            lo_i, hi_i = 0, n
            while lo_i < hi_i:
                mid = (lo_i + hi_i) // 2
                if self.t[mid] >= t:
                    lo_i = mid + 1
                else:
                    hi_i = mid
            k = lo_i - 1
        return min(max(k, 0), n - 2)

    def _eval_segment(self, k, t):
        t0, t1 = self.t[k], self.t[k + 1]
        if t == t0:
            return self.x[k]
        if t == t1:
            return self.x[k + 1]
        theta = (t - t0) / (t1 - t0)
        x0 = self.x[k]
        dx = self.x[k + 1] - x0
        th1 = 1.0 - theta
        return x0 + theta * (dx + th1 * (self._r3[k] + theta * (self._r4[k] + th1 * self._r5[k])))

    def __call__(self, t):
        return sample(self, t)

    def sample_many(self, ts):
        return np.array([sample(self, float(s)) for s in np.ravel(ts)]).reshape(np.shape(ts))

    def quad(self, func, ta, tb, order=5):
        """Integral of ``func(s, x(s))`` over ``[ta, tb]`` along the dense output.

        Gauss-Legendre with ``order`` nodes on every step overlapping the
        interval.
        """
        if ta == tb:
            return 0.0
        sign = 1.0
        if ta > tb:
            ta, tb, sign = tb, ta, -1.0
        lo, hi = self.span()
        if ta < lo - 1e-12 * max(1.0, abs(lo)) or tb > hi + 1e-12 * max(1.0, abs(hi)):
            raise OutOfRange(f"[{ta}, {tb}] not within [{lo}, {hi}]")
        ta, tb = max(ta, lo), min(tb, hi)
        nodes, weights = np.polynomial.legendre.leggauss(order)
        total = 0.0
        n = len(self.t)
        for k in range(n - 1):
            a, b = self.t[k], self.t[k + 1]
            if a > b:
                a, b = b, a
            a, b = max(a, ta), min(b, tb)
            if b <= a:
                continue
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            acc = 0.0
            for z, w in zip(nodes, weights):
                s = mid + half * z
                acc += w * func(s, self._eval_segment(k, s))
            total += half * acc
        return sign * total


def sample(traj: Trajectory, t: float) -> float:
    """Dense-output value of ``traj`` at time ``t``."""
    if len(traj.t) == 1:
        if t == traj.t[0]:
            return traj.x[0]
        raise OutOfRange(f"trajectory covers only t={traj.t[0]}")
    k = traj._locate(t)
    return traj._eval_segment(k, t)


def _error_ratio(err, x0, x1, cfg):
    return abs(err) / (cfg.abs_tol + cfg.rel_tol * max(abs(x0), abs(x1)))


def integrate(f, t0, x0, t1, cfg: IntegratorConfig = IntegratorConfig(),
              stop: Optional[Callable[[float, float], bool]] = None) -> Trajectory:
    """Integrate ``x' = f.rhs(t, x)`` from ``(t0, x0)`` to ``t1``.

    ``t1 < t0`` integrates backward. The run ends early with ``blowup`` set
    when ``|x|`` exceeds ``cfg.x_guard``; ``t_escape`` is located on the
    dense output of the step that crossed the guard. ``stop(t, x)`` is
    polled after each accepted step and, when true, ends the run with
    ``traj.stopped`` set.
    """
    if t1 == t0:
        raise ValueError("t1 must differ from t0")
    rhs = f.rhs
    x0 = float(x0)
    direction = 1 if t1 > t0 else -1
    traj = Trajectory(float(t0), x0, direction)
    if abs(x0) > cfg.x_guard:
        traj.blowup = BlowUp(float(t0), 1 if x0 > 0 else -1)
        return traj

    span = abs(t1 - t0)
    h = min(cfg.h_init, cfg.h_max, span)
    t, x = float(t0), x0
    k1 = rhs(t, x)
    if not math.isfinite(k1):
        raise NonFiniteEvaluation(f"rhs({t}, {x}) = {k1}")
    err_old = 1e-4
    rejected_last = False
    guard = cfg.x_guard
    for _ in range(cfg.max_steps):
        remaining = abs(t1 - t)
        last = h >= remaining * (1 - 1e-13)
        if last:
            h = remaining
        hs = direction * h
        x1, err, k3, k4, k5, k6, k7 = _stages(rhs, t, x, hs, k1)
        if math.isfinite(x1) and math.isfinite(err) and math.isfinite(k7):
            ratio = _error_ratio(err, x, x1, cfg)
        else:
            ratio = math.inf
        if ratio <= 1.0:
            t_new = t1 if last else t + hs
            dx = x1 - x
            r3 = hs * k1 - dx
            r4 = dx - hs * k7 - r3
            r5 = hs * (_D1 * k1 + _D3 * k3 + _D4 * k4 + _D5 * k5 + _D6 * k6 + _D7 * k7)
            traj._append(t_new, x1, r3, r4, r5)
            if abs(x1) > guard:
                traj.blowup = BlowUp(_escape_time(traj, guard), 1 if x1 > 0 else -1)
                return traj
            t, x, k1 = t_new, x1, k7
            if last:
                return traj
            if stop is not None and stop(t, x):
                traj.stopped = True
                return traj
            fac11 = ratio ** _EXPO
            fac = fac11 / err_old ** _BETA / _SAFE
            fac = min(1 / _FAC_MIN, max(1 / _FAC_MAX, fac))
            h_new = h / fac
            if rejected_last:
                h_new = min(h_new, h)
            err_old = max(ratio, 1e-4)
            rejected_last = False
            h = min(h_new, cfg.h_max)
        else:
            traj.n_rejected += 1
            if math.isfinite(ratio):
                h = h / min(1 / _FAC_MIN, ratio ** _EXPO / _SAFE)
            else:
                h = 0.1 * h
            rejected_last = True
        if h < cfg.h_min:
            raise StepUnderflow(f"step {h:.3e} below h_min at t={t}, x={x}")
    raise StepUnderflow(f"max_steps={cfg.max_steps} exhausted at t={t}")


def _escape_time(traj, guard):
    """First time on the last segment where ``|x|`` reaches the guard."""
    k = len(traj.t) - 2
    ta, tb = traj.t[k], traj.t[k + 1]
    # the interpolant need not be monotone; bisect on the crossing of the
    # last sub-guard point
    for _ in range(200):
        tm = 0.5 * (ta + tb)
        if tm == ta or tm == tb:
            break
        if abs(traj._eval_segment(k, tm)) > guard:
            tb = tm
        else:
            ta = tm
    return tb


def flow_batch(rhs_batch, t0, x0, t1, cfg: IntegratorConfig = IntegratorConfig()):
    """Advance every entry of ``x0`` from ``t0`` to ``t1`` on a shared step.

    Returns ``(x_end, escape)`` where ``escape`` is +1/-1 for entries that
    crossed ``cfg.x_guard`` (their ``x_end`` is ``+inf``/``-inf``) and 0
    otherwise. Escaped entries are dropped from the error control.
    """
    x = np.array(x0, dtype=float, copy=True).ravel()
    out = np.empty_like(x)
    escape = np.zeros(x.shape, dtype=int)
    idx = np.arange(x.size)
    big = np.abs(x) > cfg.x_guard
    escape[big] = np.sign(x[big]).astype(int)
    out[big] = np.sign(x[big]) * np.inf
    x, idx = x[~big], idx[~big]
    direction = 1.0 if t1 > t0 else -1.0
    t = float(t0)
    h = min(cfg.h_init, cfg.h_max, abs(t1 - t0))
    err_old = 1e-4
    rejected_last = False
    k1 = rhs_batch(t, x) if x.size else x
    for _ in range(cfg.max_steps):
        if x.size == 0:
            break
        remaining = abs(t1 - t)
        last = h >= remaining * (1 - 1e-13)
        if last:
            h = remaining
        hs = direction * h
        with np.errstate(all="ignore"):
            x1, err, _, _, _, _, k7 = _stages(rhs_batch, t, x, hs, k1)
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(x), np.abs(x1))
            ratio = np.max(np.abs(err) / scale)
        if not np.isfinite(ratio):
            ratio = math.inf
        if ratio <= 1.0:
            t = t1 if last else t + hs
            x, k1 = x1, k7
            gone = np.abs(x) > cfg.x_guard
            if gone.any():
                escape[idx[gone]] = np.sign(x[gone]).astype(int)
                out[idx[gone]] = np.sign(x[gone]) * np.inf
                keep = ~gone
                x, k1, idx = x[keep], k1[keep], idx[keep]
            if last:
                break
            fac = ratio ** _EXPO / err_old ** _BETA / _SAFE
            fac = min(1 / _FAC_MIN, max(1 / _FAC_MAX, fac))
            h_new = h / fac
            if rejected_last:
                h_new = min(h_new, h)
            err_old = max(ratio, 1e-4)
            rejected_last = False
            h = min(h_new, cfg.h_max)
        else:
            if math.isfinite(ratio):
                h = h / min(1 / _FAC_MIN, ratio ** _EXPO / _SAFE)
            else:
                h = 0.1 * h
            rejected_last = True
        if h < cfg.h_min:
            raise StepUnderflow(f"batch step {h:.3e} below h_min at t={t}")
    else:
        raise StepUnderflow(f"max_steps={cfg.max_steps} exhausted at t={t}")
    out[idx] = x
    return out, escape
