import math
import random

import pytest

from aperiodic.bernoulli import BernoulliShift
from aperiodic.hyperbolic import CyclicQuotientGeodesic
from aperiodic.torus import ContinuedFraction, TorusRotation

GOLDEN_CF = ContinuedFraction.golden()
GOLDEN = GOLDEN_CF.value()


@pytest.fixture
def rng():
    return random.Random(20240817)


@pytest.fixture
def golden_rotation():
    return TorusRotation((GOLDEN,), continued_fraction=ContinuedFraction.golden())


@pytest.fixture
def third_rotation():
    return TorusRotation((1.0 / 3.0,))


@pytest.fixture
def full_shift_2():
    return BernoulliShift(2)


@pytest.fixture
def full_shift_3():
    return BernoulliShift(3)


@pytest.fixture
def cyclic_geodesic():
    return CyclicQuotientGeodesic(length=(1 + math.sqrt(5)) / 2, tube_radius=0.4,
                                  k_window=2)
