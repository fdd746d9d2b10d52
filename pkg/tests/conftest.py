"""Shared fixtures: reference medium and eigensystems reused across tests."""

import numpy as np
import pytest

from ado3d import MediumParams, gauss_legendre, solve_eigensystem


@pytest.fixture(scope="session")
def medium_g09():
    """Anisotropic reference medium (mu_a=0.01/mm, mu_s=10/mm, g=0.9)."""
    return MediumParams(mu_a=0.01, mu_s=10.0, anisotropy=0.9, degree=3)


@pytest.fixture(scope="session")
def medium_g09_l9():
    return MediumParams(mu_a=0.01, mu_s=10.0, anisotropy=0.9, degree=9)


@pytest.fixture(scope="session")
def system_33(medium_g09):
    """m=0 eigensystem at (degree 3, half-order 3)."""
    return solve_eigensystem(0, gauss_legendre(3), medium_g09)


@pytest.fixture(scope="session")
def system_911(medium_g09_l9):
    """m=0 eigensystem at (degree 9, half-order 11)."""
    return solve_eigensystem(0, gauss_legendre(11), medium_g09_l9)


@pytest.fixture(scope="session")
def z_grid_standard():
    return np.linspace(-50.0, 50.0, 101)
