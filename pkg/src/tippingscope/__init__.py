"""Numerical toolkit for scalar nonautonomous concave-convex equations:
bifurcation values, period maps, tipping thresholds and shape-constrained
spline fits."""

__version__ = "0.1.0"

from .errors import TippingscopeError  # noqa: E402
from .models import (AlleePredationModel, DriverOrbit, PeriodicModel,  # noqa: E402
                     TransitionModel, gamma)
from .odeint import IntegratorConfig, ScalarField, integrate  # noqa: E402

__all__ = [
    "__version__",
    "TippingscopeError",
    "AlleePredationModel",
    "DriverOrbit",
    "PeriodicModel",
    "TransitionModel",
    "gamma",
    "IntegratorConfig",
    "ScalarField",
    "integrate",
]
