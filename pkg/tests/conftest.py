"""Shared fixtures: grids and families are expensive, so session-scoped."""

from fractions import Fraction

import pytest

from isobispec.grid import Grid
from isobispec.potential import build_potential, make_family, zero_potential

SMALL_N = 160          # fast grid for property tests (snaps to 160)
DEFAULT_N = 2048       # reference fixture (snaps to 2080)


@pytest.fixture(scope="session")
def grid_small():
    return Grid(Fraction(7, 20), SMALL_N)


@pytest.fixture(scope="session")
def grid_default():
    return Grid(Fraction(7, 20), DEFAULT_N)


@pytest.fixture(scope="session")
def family_default():
    return make_family(grid_n=DEFAULT_N)


@pytest.fixture(scope="session")
def family_b1_default():
    return make_family(eigsign=-1, grid_n=DEFAULT_N)


@pytest.fixture(scope="session")
def family_mid():
    """Same fixture on a half-density grid (for convergence comparisons)."""
    return make_family(grid_n=1024)


@pytest.fixture(scope="session")
def q_alpha1(family_default):
    return build_potential(family_default, 1)


@pytest.fixture(scope="session")
def q_alpha0(family_default):
    return build_potential(family_default, 0)


@pytest.fixture(scope="session")
def q_zero(grid_default):
    return zero_potential(grid_default)
