import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from torsionlab.presentation import parse_presentation, torus_knot_presentation

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TREFOIL_DSL = "gens: a, b\nrel: a*b*a*B*A*B\nmeridian: a\n"
FIGURE_EIGHT_DSL = "gens: a, b\nrel: A*b*a*B*a*b*A*B*a*B\nmeridian: a\n"
UNKNOT_DSL = "gens: x\nmeridian: x\n"


@pytest.fixture
def trefoil():
    return parse_presentation(TREFOIL_DSL)


@pytest.fixture
def figure_eight():
    return parse_presentation(FIGURE_EIGHT_DSL)


@pytest.fixture
def unknot():
    return parse_presentation(UNKNOT_DSL)


@pytest.fixture
def torus3():
    return torus_knot_presentation(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)
