import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tippingscope.odeint import ScalarField

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def field(rhs, d1=None, **kw):
    """ScalarField from plain callables, with a finite-difference d1 fallback."""
    if d1 is None:
        d1 = lambda t, x: (rhs(t, x + 1e-6) - rhs(t, x - 1e-6)) / 2e-6
    return ScalarField(rhs, d1, **kw)


@pytest.fixture
def linear_decay():
    return field(lambda t, x: -x, lambda t, x: -1.0)


@pytest.fixture
def growth():
    return field(lambda t, x: x, lambda t, x: 1.0)
