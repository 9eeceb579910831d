"""Pullback attractive solutions of the predation-pulse transition equation
and the tracking/tipping classification in the pulse size ``rho``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from .errors import BadBracket, NotConverged, UnexpectedRootCount
from .models import TransitionModel, gamma
from .odeint import IntegratorConfig, Trajectory, integrate

__all__ = [
    "Outcome",
    "PastLimits",
    "TippingReport",
    "TRANSITION_CONFIG",
    "past_limits",
    "pullback_solution",
    "repulsive_solution",
    "classify_run",
    "locate_tipping",
    "finite_time_exponent",
]

T_PAST = -2.5e5
BURN_IN = 1.0e3
# pullback starts are repeated this much earlier to certify convergence
RESTART_SHIFT = 1.0e3
AGREE_TOL = 1e-6
# after this time the pulse has relaxed and u is far from the repeller
T_SETTLE = 5.0e3

# long runs use relaxed tolerances
TRANSITION_CONFIG = IntegratorConfig(abs_tol=1e-9, rel_tol=1e-9, h_init=1e-2, x_guard=1e7)


class Outcome(str, Enum):
    TRACKING = "Tracking"
    TIPPING = "Tipping"


@dataclass(frozen=True)
class PastLimits:
    roots: Tuple[float, ...]
    stabilities: Tuple[str, ...]

    @property
    def lower(self):
        return self.roots[0]

    @property
    def middle(self):
        return self.roots[1]

    @property
    def upper(self):
        return self.roots[2]

    def to_dict(self):
        return {"roots": list(self.roots), "stabilities": list(self.stabilities)}


def _limits(model, future):
    roots = model.limit_roots(future=future)
    if len(roots) != 3:
        when = "future" if future else "past"
        raise UnexpectedRootCount(f"{when} limit equation has roots {roots}, expected 3")
    m = model.base
    extra = model.rho if future else 0.0
    stab = []
    for y in roots:
        hy = m.derivs_kd(y, m.K(0.0), m.Delta(0.0) + extra)[1]
        stab.append("Attractive" if hy < 0 else "Repulsive" if hy > 0 else "Neutral")
    return PastLimits(tuple(roots), tuple(stab))


def past_limits(model: TransitionModel) -> PastLimits:
    """Equilibria of ``y' = h(0, y)``, the equation seen as ``t -> -inf``."""
    return _limits(model, future=False)


def future_limits(model: TransitionModel) -> PastLimits:
    """Equilibria of ``y' = h(0, y) - rho f(y)``, the limit as ``t -> +inf``."""
    return _limits(model, future=True)


def _pullback_run(model, x_init, t_past, t_end, cfg, stop=None):
    return integrate(model.field, t_past, x_init, t_end, cfg, stop=stop)


def pullback_solution(model: TransitionModel, rho: Optional[float] = None, which: str = "upper",
                      t_past: float = T_PAST, t_end: float = 1.0e3,
                      cfg: IntegratorConfig = TRANSITION_CONFIG, certify: bool = True,
                      stop=None) -> Trajectory:
    """Approximate the locally pullback attractive solution ``u_rho``
    (``which="upper"``) or ``l_rho`` (``"lower"``).

    Integrates forward from the matching past equilibrium at ``t_past``.
    With ``certify`` the run is repeated from ``t_past - 1e3`` and both must
    agree to 1e-6 at ``min(0, t_end)``.
    """
    if rho is not None:
        model = model.with_rho(rho)
    if gamma(t_past) > 1e-5 or model.driver.omega(t_past) > 1e-3:
        raise ValueError(f"t_past={t_past} is not in the past-limit regime")
    lim = past_limits(model)
    x_init = {"upper": lim.upper, "lower": lim.lower}[which]
    traj = _pullback_run(model, x_init, t_past, t_end, cfg, stop)
    if certify:
        t_chk = min(0.0, t_end)
        ref = _pullback_run(model, x_init, t_past - RESTART_SHIFT, t_chk, cfg)
        if traj.blowup is None and ref.blowup is None and traj.t_final >= t_chk:
            gap = abs(traj(t_chk) - ref.x_final)
            if gap > AGREE_TOL:
                raise NotConverged(f"pullback starts disagree by {gap:.3g} at t={t_chk}")
    return traj


def repulsive_solution(model: TransitionModel, rho: Optional[float] = None,
                       t_future: float = 5.0e3, t_end: float = -1.0e3,
                       cfg: IntegratorConfig = TRANSITION_CONFIG, certify: bool = True) -> Trajectory:
    """Middle (repulsive) hyperbolic solution, obtained by integrating
    backward from the middle root of the future limit equation."""
    if rho is not None:
        model = model.with_rho(rho)
    lim = future_limits(model)
    traj = integrate(model.field, t_future, lim.middle, t_end, cfg)
    if certify:
        ref = integrate(model.field, t_future + RESTART_SHIFT, lim.middle, 0.0, cfg)
        gap = abs(traj(0.0) - ref.x_final)
        if gap > AGREE_TOL:
            raise NotConverged(f"backward starts disagree by {gap:.3g} at t=0")
    return traj


def _middle_root_stop(model, t_settle):
    def stop(t, y):
        if t < t_settle:
            return False
        roots = model.frozen_roots(t)
        return len(roots) == 3 and y < roots[1]
    return stop


def classify_run(model: TransitionModel, rho: Optional[float] = None, horizon: float = 1.0e6,
                 epsilon: float = 1e-3, t_past: float = T_PAST,
                 cfg: IntegratorConfig = TRANSITION_CONFIG, early_exit: bool = True,
                 certify: bool = False) -> Outcome:
    """Tracking iff ``u_rho(horizon) - l_rho(horizon) >= epsilon``.

    With ``early_exit`` the upper run stops as Tipping once it lies below
    the middle equilibrium of the frozen equation after ``T_SETTLE``.
    """
    if rho is not None:
        model = model.with_rho(rho)
    stop = _middle_root_stop(model, min(T_SETTLE, horizon)) if early_exit else None
    upper = pullback_solution(model, None, "upper", t_past, horizon, cfg, certify, stop)
    if upper.stopped:
        return Outcome.TIPPING
    if upper.blowup is not None:
        raise NotConverged(f"upper solution escaped at t={upper.blowup.t_escape}")
    lower = pullback_solution(model, None, "lower", t_past, horizon, cfg, False)
    gap = upper.x_final - lower.x_final
    return Outcome.TRACKING if gap >= epsilon else Outcome.TIPPING


@dataclass
class TippingReport:
    rho_values: List[float] = field(default_factory=list)
    classifications: List[Outcome] = field(default_factory=list)
    bracket: Tuple[float, float] = (math.nan, math.nan)
    horizon: float = math.nan
    epsilon: float = math.nan

    def record(self, rho, outcome):
        self.rho_values.append(float(rho))
        self.classifications.append(outcome)

    def is_monotone(self):
        pairs = sorted(zip(self.rho_values, self.classifications))
        seen_tipping = False
        for _, c in pairs:
            if c is Outcome.TIPPING:
                seen_tipping = True
            elif seen_tipping:
                return False
        return True

    def to_dict(self):
        return {
            "rho_values": self.rho_values,
            "classifications": [c.value for c in self.classifications],
            "bracket": list(self.bracket),
            "horizon": self.horizon,
            "epsilon": self.epsilon,
        }


def locate_tipping(model: TransitionModel, rho_lo: float, rho_hi: float, tol: float = 1e-3,
                   horizon: float = 1.0e6, epsilon: float = 1e-3,
                   cfg: IntegratorConfig = TRANSITION_CONFIG, early_exit: bool = True,
                   progress=None) -> TippingReport:
    """Bisection on ``rho`` between a tracking and a tipping value.

    Relies on ``rho -> u_rho`` being decreasing, so the classification is
    monotone in ``rho``.
    """
    if not rho_hi > rho_lo:
        raise BadBracket(f"degenerate bracket [{rho_lo}, {rho_hi}]")
    rep = TippingReport(horizon=horizon, epsilon=epsilon)

    def run(rho):
        out = classify_run(model, rho, horizon, epsilon, cfg=cfg, early_exit=early_exit)
        rep.record(rho, out)
        if progress is not None:
            progress(rho, out)
        return out

    if run(rho_lo) is not Outcome.TRACKING:
        raise BadBracket(f"rho_lo={rho_lo} does not track")
    if run(rho_hi) is not Outcome.TIPPING:
        raise BadBracket(f"rho_hi={rho_hi} does not tip")
    lo, hi = rho_lo, rho_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if run(mid) is Outcome.TRACKING:
            lo = mid
        else:
            hi = mid
    rep.bracket = (lo, hi)
    return rep


def finite_time_exponent(f, traj: Trajectory, t0: float, t1: float) -> float:
    """Time average of ``f_x`` along ``traj`` over ``[t0, t1]``."""
    if t1 == t0:
        raise ValueError("empty window")
    d1 = f.d1 if hasattr(f, "d1") else f.field.d1
    return traj.quad(d1, t0, t1) / (t1 - t0)
