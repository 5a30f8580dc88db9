import numpy as np
import pytest

# radial warps used throughout the bundled configs
BUNDLED_WARPS = [
    ("sinh(r)", 0.5, 8.0),
    ("sin(r) + r*log(r)^2", 2.0, 60.0),
    ("r*log(r)^2", 2.0, 60.0),
    ("0.9*sinh(0.5*r + 1)", 0.0, 15.0),
    ("cosh(r)", 0.0, 8.0),
    ("r^2", 1.0, 20.0),
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
