"""Grid scan + bracketing refinement shared by several modules."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

_EPS = np.finfo(float).eps


def sign_brackets(xs, vals):
    """Roots at grid nodes and sign-change brackets of sampled values.

    Exact zeros at nodes are returned as roots; a bracket is reported only
    between adjacent nodes with strictly opposite signs. Infinite values
    carry their sign.
    """
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    s = np.sign(vals)
    exact = [float(x) for x, si in zip(xs, s) if si == 0]
    brackets = []
    for i in range(len(xs) - 1):
        if s[i] * s[i + 1] < 0:
            brackets.append((i, float(xs[i]), float(xs[i + 1])))
    return exact, brackets


def refine(func, a, b, fa=None, fb=None, xtol=1e-10):
    """Root of ``func`` in ``[a, b]`` given a sign change.

    Infinite endpoint values are first removed by bisection so that Brent's
    method only sees finite values.
    """
    fa = func(a) if fa is None else fa
    fb = func(b) if fb is None else fb
    if fa == 0:
        return a
    if fb == 0:
        return b
    while not (math.isfinite(fa) and math.isfinite(fb)):
        m = 0.5 * (a + b)
        fm = func(m)
        if fm == 0:
            return m
        if abs(b - a) <= xtol:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return brentq(func, a, b, xtol=xtol, rtol=4 * _EPS, maxiter=500)


def scan_roots(func, lo, hi, n, xtol=1e-10, vectorized=False):
    """All roots of ``func`` on ``[lo, hi]`` seen by an ``n``-point grid."""
    xs = np.linspace(lo, hi, n)
    if lo < 0.0 < hi:
        # keep 0 as an exact node; several models have a root there
        xs = np.unique(np.concatenate([xs, [0.0]]))
    vals = func(xs) if vectorized else np.array([func(float(x)) for x in xs])
    exact, brackets = sign_brackets(xs, vals)
    roots = list(exact)
    for i, a, b in brackets:
        roots.append(refine(func, a, b, float(vals[i]), float(vals[i + 1]), xtol))
    return sorted(roots)
