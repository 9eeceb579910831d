"""Model definitions.

* :class:`PeriodicModel` -- ``x' = d x + cos(t + s) + g(x) + lam`` with a
  piecewise cubic ``g`` and its concave-linear / linear-convex splits.
* :class:`AlleePredationModel` -- Allee growth with a Holling type III
  predation term, parametrised by the driving angle ``omega``.
* :class:`DriverOrbit` -- the heteroclinic solution of ``omega' = 1 - cos(omega)``.
* :class:`TransitionModel` -- the Allee model along the driver orbit with an
  extra predation pulse ``rho * gamma(t)``.
* :class:`Decomposition` -- ``f(t, x) = c(t) + d(t) x + g(t, x)`` after shifting
  a pivot curve to ``x = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidAnchor, NoBracket
from .odeint import ScalarField

__all__ = [
    "gamma",
    "DriverOrbit",
    "driver_omega",
    "PeriodicModel",
    "AlleePredationModel",
    "TransitionModel",
    "Decomposition",
    "make_decomposition",
    "split_g",
]

TWO_PI = 2.0 * math.pi


def gamma(t):
    """Predation pulse: ~0 in the far past, peak slightly above 14 near
    t = 0.174, and 1 in the far future."""
    if isinstance(t, np.ndarray):
        return 15 * np.arctan(t + 10) / np.pi - 14 * np.arctan(t - 10) / np.pi + 0.5
    return 15 * math.atan(t + 10) / math.pi - 14 * math.atan(t - 10) / math.pi + 0.5


@dataclass(frozen=True)
class DriverOrbit:
    """Increasing solution of ``omega' = 1 - cos(omega)`` through the anchor.

    Separating variables gives ``-cot(omega/2) = t + C``, i.e.
    ``omega(t) = pi + 2 atan(t + C)``.
    """

    t_ref: float = -2.0e5
    omega_ref: float = 1.0e-5

    def __post_init__(self):
        if not (0.0 < self.omega_ref < TWO_PI):
            raise InvalidAnchor(f"omega_ref={self.omega_ref} not in (0, 2pi)")

    @property
    def shift(self):
        # tan((w - pi)/2) = -cot(w/2), evaluated without cancellation for small w
        w = self.omega_ref
        return -1.0 / math.tan(0.5 * w) - self.t_ref

    def omega(self, t):
        z = t + self.shift
        if isinstance(z, np.ndarray):
            out = np.empty_like(z, dtype=float)
            neg = z < 0
            out[neg] = 2.0 * np.arctan(-1.0 / z[neg])
            pos = ~neg
            zz = z[pos]
            with np.errstate(divide="ignore"):
                out[pos] = np.where(zz == 0, math.pi, TWO_PI - 2.0 * np.arctan(1.0 / zz))
            return out
        if z < 0:
            return 2.0 * math.atan(-1.0 / z)
        if z == 0:
            return math.pi
        return TWO_PI - 2.0 * math.atan(1.0 / z)

    def omega_dot(self, t):
        z = t + self.shift
        return 2.0 / (1.0 + z * z)


def driver_omega(orbit: DriverOrbit, t):
    return orbit.omega(t)


# ---------------------------------------------------------------------------
# periodic cubic family


@dataclass(frozen=True)
class PeriodicModel:
    """``x' = d x + cos(t + phase) + g(x) + lam`` with
    ``g(x) = -g_plus x^3`` for ``x <= 0`` and ``-g_minus x^3`` for ``x >= 0``.

    ``split`` selects the full field (``"full"``), the concave-linear part
    ``min(0, g)`` (``"minus"``) or the linear-convex part ``max(0, g)``
    (``"plus"``).
    """

    d: float = 0.1
    g_minus: float = 0.005
    g_plus: float = 0.005
    lam: float = 0.0
    phase: float = 0.0
    split: str = "full"

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("d must be positive")
        if self.g_minus < 0 or self.g_plus < 0:
            raise ValueError("cubic coefficients must be nonnegative")
        if self.split not in ("full", "minus", "plus"):
            raise ValueError(f"unknown split {self.split!r}")

    def with_lambda(self, lam):
        return replace(self, lam=float(lam))

    def with_split(self, split):
        return replace(self, split=split)

    # the cubic and its derivatives, scalar versions
    def g(self, x):
        if x >= 0:
            return 0.0 if self.split == "plus" else -self.g_minus * x ** 3
        return 0.0 if self.split == "minus" else -self.g_plus * x ** 3

    def g_x(self, x):
        if x >= 0:
            return 0.0 if self.split == "plus" else -3.0 * self.g_minus * x * x
        return 0.0 if self.split == "minus" else -3.0 * self.g_plus * x * x

    def g_xx(self, x):
        if x >= 0:
            return 0.0 if self.split == "plus" else -6.0 * self.g_minus * x
        return 0.0 if self.split == "minus" else -6.0 * self.g_plus * x

    def g_xxx(self, x):
        if x > 0:
            return 0.0 if self.split == "plus" else -6.0 * self.g_minus
        if x < 0:
            return 0.0 if self.split == "minus" else -6.0 * self.g_plus
        # one-sided values differ at 0 unless g_minus == g_plus
        return -6.0 * min(self.g_minus if self.split != "plus" else 0.0,
                          self.g_plus if self.split != "minus" else 0.0)

    def g_batch(self, x):
        gm = 0.0 if self.split == "plus" else self.g_minus
        gp = 0.0 if self.split == "minus" else self.g_plus
        return np.where(x >= 0, -gm * x ** 3, -gp * x ** 3)

    def rhs(self, t, x):
        return self.d * x + math.cos(t + self.phase) + self.g(x) + self.lam

    def d1(self, t, x):
        return self.d + self.g_x(x)

    def d2(self, t, x):
        return self.g_xx(x)

    def d3(self, t, x):
        return self.g_xxx(x)

    def rhs_batch(self, t, x):
        return self.d * x + math.cos(t + self.phase) + self.g_batch(x) + self.lam

    @property
    def field(self) -> ScalarField:
        shape = {"minus": "concave", "plus": "convex", "full": None}[self.split]
        return ScalarField(self.rhs, self.d1, self.d2, self.d3,
                           rhs_batch=self.rhs_batch, shape=shape)

    def decomposition(self) -> "Decomposition":
        variant = {"full": "Full", "minus": "ConcaveLinear", "plus": "LinearConvex"}[self.split]
        return Decomposition(
            c=lambda t: math.cos(t + self.phase) + self.lam,
            d=lambda t: self.d,
            g=lambda t, x: self.g(x),
            g_x=lambda t, x: self.g_x(x),
            g_xxx=lambda t, x: self.g_xxx(x),
            variant=variant,
        )


# ---------------------------------------------------------------------------
# Allee growth with Holling type III predation


def _holling(y, b):
    y2 = y * y
    return y2 / (b + y2)


def _holling_derivs(y, b):
    """(q, q', q'', q''') for q(y) = y^2 / (b + y^2)."""
    y2 = y * y
    den = b + y2
    q = y2 / den
    q1 = 2 * b * y / den ** 2
    q2 = 2 * b * (b - 3 * y2) / den ** 3
    q3 = 24 * b * y * (y2 - b) / den ** 4
    return q, q1, q2, q3


@dataclass(frozen=True)
class AlleePredationModel:
    """``h(omega, y) = r y (1 - y/K) (y - S)/K - D y^2/(b + y^2)`` with
    ``K = K0 + K1 cos(omega)`` and ``D = D0 + D1 sin(omega)``."""

    r: float = 3.0
    S: float = 0.3
    b: float = 620.0
    K0: float = 39.3
    K1: float = 1.0
    D0: float = 39.2
    D1: float = 1.0

    def __post_init__(self):
        if not (self.K0 > self.K1 >= 0):
            raise ValueError("need K0 > K1 >= 0")
        # D0 = D1 = 0 is the predation-free special case
        if not (self.D0 > self.D1 >= 0 or self.D0 == self.D1 == 0):
            raise ValueError("need D0 > D1 >= 0")

    def K(self, omega):
        return self.K0 + self.K1 * (np.cos(omega) if isinstance(omega, np.ndarray) else math.cos(omega))

    def Delta(self, omega):
        return self.D0 + self.D1 * (np.sin(omega) if isinstance(omega, np.ndarray) else math.sin(omega))

    # slices at fixed (K, Delta)
    def h_kd(self, y, K, D):
        return self.r * y * (1 - y / K) * (y - self.S) / K - D * _holling(y, self.b)

    def derivs_kd(self, y, K, D):
        """(h, h_y, h_yy, h_yyy) at fixed (K, Delta); works on arrays."""
        r, S = self.r, self.S
        # polynomial part: -r y^3/K^2 + r (1 + S/K) y^2/K - r S y/K
        a3 = -r / K ** 2
        a2 = r * (1 + S / K) / K
        a1 = -r * S / K
        q, q1, q2, q3 = _holling_derivs(y, self.b)
        h = ((a3 * y + a2) * y + a1) * y - D * q
        hy = (3 * a3 * y + 2 * a2) * y + a1 - D * q1
        hyy = 6 * a3 * y + 2 * a2 - D * q2
        hyyy = 6 * a3 - D * q3
        return h, hy, hyy, hyyy

    def h(self, omega, y):
        return self.h_kd(y, self.K(omega), self.Delta(omega))

    def h_y(self, omega, y):
        return self.derivs_kd(y, self.K(omega), self.Delta(omega))[1]

    def h_yy(self, omega, y):
        return self.derivs_kd(y, self.K(omega), self.Delta(omega))[2]

    def h_yyy(self, omega, y):
        return self.derivs_kd(y, self.K(omega), self.Delta(omega))[3]

    def h_yy_omega(self, omega, y):
        """Partial derivative of ``h_yy`` with respect to ``omega``."""
        r, S = self.r, self.S
        K = self.K(omega)
        dK = -self.K1 * math.sin(omega)
        dD = self.D1 * math.cos(omega)
        dhyy_dK = 12 * r * y / K ** 3 - 2 * r / K ** 2 - 4 * r * S / K ** 3
        q2 = _holling_derivs(y, self.b)[2]
        return dhyy_dK * dK - dD * q2

    def inflection(self, omega, y_max=50.0):
        """Unique positive root of ``y -> h_yy(omega, y)`` (the concavity switch)."""
        f = lambda y: self.h_yy(omega, y)
        lo, hi = 0.0, y_max
        if not f(lo) > 0 > f(hi):
            raise NoBracket(f"h_yy has no +/- bracket on [0, {y_max}] at omega={omega}",
                            [omega])
        return brentq(f, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)

    def inflection_dot(self, omega, y=None):
        """d/d(omega) of the inflection curve (implicit function theorem)."""
        if y is None:
            y = self.inflection(omega)
        return -self.h_yy_omega(omega, y) / self.h_yyy(omega, y)

    def slice_field(self, omega) -> ScalarField:
        """Autonomous field ``y' = h(omega, y)`` at frozen ``omega``."""
        K, D = self.K(omega), self.Delta(omega)
        return ScalarField(
            rhs=lambda t, y: self.h_kd(y, K, D),
            d1=lambda t, y: self.derivs_kd(y, K, D)[1],
            d2=lambda t, y: self.derivs_kd(y, K, D)[2],
            d3=lambda t, y: self.derivs_kd(y, K, D)[3],
        )


@dataclass(frozen=True)
class TransitionModel:
    """``y' = h(omega(t), y) - rho * gamma(t) * f(y)`` along the driver orbit.

    With ``clamp_negative`` the pulse acts through ``f(y) = y^2/(b+y^2)`` for
    ``y >= 0`` and ``f = 0`` for ``y < 0``.
    """

    base: AlleePredationModel = field(default_factory=AlleePredationModel)
    rho: float = 0.0
    clamp_negative: bool = True
    driver: DriverOrbit = field(default_factory=DriverOrbit)

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")

    def with_rho(self, rho):
        return replace(self, rho=float(rho))

    def pulse(self, y):
        if self.clamp_negative and y < 0:
            return 0.0
        return _holling(y, self.base.b)

    def rhs(self, t, y):
        m = self.base
        # inline of h(omega, y) for speed on long runs
        w = self.driver.omega(t)
        K = m.K0 + m.K1 * math.cos(w)
        D = m.D0 + m.D1 * math.sin(w)
        y2 = y * y
        q = y2 / (m.b + y2)
        out = m.r * y * (1.0 - y / K) * (y - m.S) / K - D * q
        if self.rho:
            if y >= 0 or not self.clamp_negative:
                out -= self.rho * gamma(t) * q
        return out

    def _derivs(self, t, y):
        m = self.base
        w = self.driver.omega(t)
        out = list(m.derivs_kd(y, m.K(w), m.Delta(w)))
        if self.rho and (y >= 0 or not self.clamp_negative):
            g = self.rho * gamma(t)
            for i, qi in enumerate(_holling_derivs(y, m.b)):
                out[i] -= g * qi
        return out

    def d1(self, t, y):
        return self._derivs(t, y)[1]

    def d2(self, t, y):
        return self._derivs(t, y)[2]

    def d3(self, t, y):
        return self._derivs(t, y)[3]

    @property
    def field(self) -> ScalarField:
        return ScalarField(self.rhs, self.d1, self.d2, self.d3)

    def frozen_roots(self, t, y_lo=-5.0, y_hi=60.0):
        """Equilibria of the equation frozen at time ``t`` (ascending)."""
        m = self.base
        w = self.driver.omega(t)
        K, D = m.K(w), m.Delta(w)
        return _allee_roots(m, K, D + self.rho * gamma(t), y_lo, y_hi)

    def limit_roots(self, future=False):
        """Equilibria of the past (or future) limit equation."""
        m = self.base
        extra = self.rho if future else 0.0
        return _allee_roots(m, m.K(0.0), m.Delta(0.0) + extra, -5.0, 60.0)

    def inflection_pivot(self, t):
        """Inflection curve of the unperturbed model along the orbit."""
        return self.base.inflection(self.driver.omega(t))

    def inflection_pivot_dot(self, t):
        w = self.driver.omega(t)
        return self.base.inflection_dot(w) * (1.0 - math.cos(w))


def _allee_roots(m, K, D, y_lo, y_hi):
    """Real roots of ``h_kd(., K, D)`` in ``[y_lo, y_hi]``.

    ``y = 0`` is always a root; the others solve the quartic obtained by
    dividing by ``y`` and clearing the Holling denominator.
    """
    r, S, b = m.r, m.S, m.b
    # r (1 - y/K)(y - S)(b + y^2)/K - D y = 0
    lin = np.poly1d([-1.0 / K, 1.0]) * np.poly1d([1.0, -S]) * np.poly1d([1.0, 0.0, b])
    poly = (r / K) * lin - np.poly1d([D, 0.0])
    roots = [0.0] if y_lo <= 0.0 <= y_hi else []
    h = lambda y: m.h_kd(y, K, D)
    for z in poly.roots:
        if abs(z.imag) > 1e-7 * max(1.0, abs(z.real)):
            continue
        y = float(z.real)
        if not (y_lo <= y <= y_hi) or y == 0.0:
            continue
        # polish on the original function
        dy = 1e-6 * max(1.0, abs(y))
        a, c = y - dy, y + dy
        if h(a) * h(c) < 0:
            y = brentq(h, a, c, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        roots.append(y)
    return sorted(roots)


# ---------------------------------------------------------------------------
# decompositions


@dataclass(frozen=True)
class Decomposition:
    """``f(t, x) = c(t) + d(t) x + g(t, x)`` with ``g(t, 0) = g_x(t, 0) = 0``.

    ``variant`` is ``"Full"``, ``"ConcaveLinear"`` (``g = min(0, g)``) or
    ``"LinearConvex"`` (``g = max(0, g)``).
    """

    c: Callable[[float], float]
    d: Callable[[float], float]
    g: Callable[[float, float], float]
    g_x: Callable[[float, float], float]
    g_xxx: Optional[Callable[[float, float], float]] = None
    variant: str = "Full"

    def rhs(self, t, x, lam=0.0):
        return self.c(t) + self.d(t) * x + self.g(t, x) + lam

    def field(self, lam=0.0) -> ScalarField:
        return ScalarField(
            rhs=lambda t, x: self.rhs(t, x, lam),
            d1=lambda t, x: self.d(t) + self.g_x(t, x),
        )


def make_decomposition(f: ScalarField, pivot: Callable[[float], float],
                       pivot_dot: Optional[Callable[[float], float]] = None,
                       fd_step: float = 1e-4) -> Decomposition:
    """Shift ``pivot`` to the origin: ``x = y - pivot(t)``.

    ``pivot_dot`` defaults to a central difference with step ``fd_step``.
    """
    if pivot_dot is None:
        pivot_dot = lambda t: (pivot(t + fd_step) - pivot(t - fd_step)) / (2 * fd_step)

    def c(t):
        return f.rhs(t, pivot(t)) - pivot_dot(t)

    def d(t):
        return f.d1(t, pivot(t))

    def g(t, x):
        p = pivot(t)
        return f.rhs(t, x + p) - f.rhs(t, p) - f.d1(t, p) * x

    def g_x(t, x):
        p = pivot(t)
        return f.d1(t, x + p) - f.d1(t, p)

    g_xxx = None
    if f.d3 is not None:
        g_xxx = lambda t, x: f.d3(t, x + pivot(t))
    return Decomposition(c=c, d=d, g=g, g_x=g_x, g_xxx=g_xxx)


def split_g(dec: Decomposition):
    """Return the concave-linear (``min(0, g)``) and linear-convex
    (``max(0, g)``) decompositions of a full one."""
    if dec.variant != "Full":
        raise ValueError("split_g needs a Full decomposition")
    g, g_x, g_xxx = dec.g, dec.g_x, dec.g_xxx

    def g_minus(t, x):
        return min(0.0, g(t, x))

    def g_plus(t, x):
        return max(0.0, g(t, x))

    def gx_minus(t, x):
        return g_x(t, x) if g(t, x) < 0 else 0.0

    def gx_plus(t, x):
        return g_x(t, x) if g(t, x) > 0 else 0.0

    def gxxx_minus(t, x):
        return g_xxx(t, x) if g(t, x) < 0 else 0.0

    def gxxx_plus(t, x):
        return g_xxx(t, x) if g(t, x) > 0 else 0.0

    has3 = g_xxx is not None
    minus = Decomposition(dec.c, dec.d, g_minus, gx_minus,
                          gxxx_minus if has3 else None, "ConcaveLinear")
    plus = Decomposition(dec.c, dec.d, g_plus, gx_plus,
                         gxxx_plus if has3 else None, "LinearConvex")
    return minus, plus
