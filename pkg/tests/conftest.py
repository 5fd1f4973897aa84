import math

import numpy as np
import pytest
from hypothesis import strategies as st


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@st.composite
def unit_vectors(draw):
    v = draw(
        st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3).filter(
            lambda x: np.linalg.norm(x) > 1e-3
        )
    )
    return unit(v)


@st.composite
def ball_vectors(draw):
    v = draw(unit_vectors())
    return v * draw(st.floats(0.0, 1.0))


@st.composite
def feasible_points(draw, p_lo=0.505, p_hi=0.97):
    """(p, theta) with 0 <= theta <= 0.99 * theta_max(p)."""
    from jointmeas.povm import max_theta

    p = draw(st.floats(p_lo, p_hi))
    frac = draw(st.floats(0.0, 0.99))
    return p, frac * max_theta(p)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


DEG = math.pi / 180.0
