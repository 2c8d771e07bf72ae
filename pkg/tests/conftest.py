"""Shared fixtures.

The fair-passage constructions dominate the suite's runtime (the omega=1
build diagonalizes a dimension-2744 space at every grid node), so they are
built once per session and shared between the unit tests and the
acceptance suite.
"""

import warnings

import pytest

from sbanneal import build_basis, build_fair_pair
from sbanneal.spectrum import AmbiguousTargetWarning

FAIR_GRID = 101


def _build_pair(omega, n_max, grid_points=FAIR_GRID):
    # strongly coupled nodes legitimately warn; the per-node flags keep the record
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AmbiguousTargetWarning)
        return build_fair_pair(3, omega, n_max, grid_points=grid_points)


@pytest.fixture(scope="session")
def spin_basis_3():
    return build_basis(3, 0, 0)


@pytest.fixture(scope="session")
def spin_basis_5():
    return build_basis(5, 0, 0)


@pytest.fixture(scope="session")
def sb_basis_nmax4():
    return build_basis(3, 3, 4)


@pytest.fixture(scope="session")
def sb_basis_nmax6():
    return build_basis(3, 3, 6)


@pytest.fixture(scope="session")
def fair_pair_10():
    return _build_pair(10.0, 4)


@pytest.fixture(scope="session")
def fair_pair_3():
    return _build_pair(3.0, 4)


@pytest.fixture(scope="session")
def fair_pair_3_fine():
    return _build_pair(3.0, 4, grid_points=2 * FAIR_GRID - 1)


@pytest.fixture(scope="session")
def fair_pair_1():
    return _build_pair(1.0, 6)
