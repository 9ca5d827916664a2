import numpy as np
import pytest

from deltalab.density import ExponentialDensity
from deltalab.sharpness import sharp_family
from deltalab.suite import random_histogram, standard_suite, triangle, uniform


@pytest.fixture(scope="session")
def full_suite():
    return list(standard_suite())


@pytest.fixture(scope="session")
def small_suite():
    """Named densities plus a handful of random histograms; cheap enough for unit tests."""
    items = [("uniform", uniform()), ("triangle", triangle())]
    items += [(f"exp:{r:g}", ExponentialDensity(r)) for r in (0.5, 1.0, 2.0)]
    items += [(f"sharp:{n}", sharp_family(n)) for n in (2, 5, 8, 12)]
    rng = np.random.default_rng(7)
    items += [(f"random:{i}", random_histogram(rng)) for i in range(12)]
    return items


@pytest.fixture(scope="session")
def small_histograms(small_suite):
    return [(name, d) for name, d in small_suite if not name.startswith("exp")]
