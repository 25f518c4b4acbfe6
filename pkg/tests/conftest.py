from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

import fracmax as fm

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("default")

np.seterr(all="raise", under="ignore")


@pytest.fixture
def two_point():
    return fm.path_space(2)


@pytest.fixture
def path3():
    return fm.path_space(3)


@pytest.fixture
def path5():
    return fm.path_space(5)


@pytest.fixture
def gasket1():
    return fm.sierpinski_graph_space(1)


@pytest.fixture
def cloud6():
    return fm.random_cloud_space(6, 2, seed=11)


@pytest.fixture
def single_point():
    return fm.grid_space(1)


# ----------------------------------------------------------------------
# hypothesis strategies
# ----------------------------------------------------------------------
@st.composite
def small_spaces(draw, min_points: int = 2, max_points: int = 8):
    """Random weighted point clouds on a coarse integer lattice.

    Lattice coordinates guarantee distinct points and keep every distance
    well away from floating-point ties.
    """
    pts = draw(
        st.sets(
            st.tuples(st.integers(0, 12), st.integers(0, 12)),
            min_size=min_points,
            max_size=max_points,
        )
    )
    coords = np.array(sorted(pts), dtype=float) / 4.0
    weights = np.array(
        draw(
            st.lists(
                st.sampled_from([0.5, 1.0, 2.0]),
                min_size=len(coords),
                max_size=len(coords),
            )
        )
    )
    return fm.space_from_coords(coords, weights=weights)


@st.composite
def functions_on(draw, space):
    vals = draw(
        st.lists(
            st.floats(-2.0, 2.0, allow_nan=False, width=32),
            min_size=space.n,
            max_size=space.n,
        )
    )
    return np.array(vals, dtype=float)


@st.composite
def spaces_with_functions(draw, min_points: int = 2, max_points: int = 8):
    space = draw(small_spaces(min_points, max_points))
    u = draw(functions_on(space))
    return space, u
