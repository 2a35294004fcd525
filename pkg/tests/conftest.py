"""Shared helpers for the test suite."""

import numpy as np
import pytest

from morphosim.geometry import Grid, WallProfile, close_profile


def random_closed_profile(m: int, seed: int, eps: float = 0.12,
                          n_modes: int = 6, exact: bool = False) -> WallProfile:
    """Perturbed sphere built from closure-neutral cosine modes (k >= 2).

    Modes k >= 2 leave the radial closure defect at second order in eps, so
    these profiles are closed to high accuracy without any projection; with
    ``exact=True`` the residual defect is removed through the first mode.
    """
    rng = np.random.default_rng(seed)
    amps = {k: rng.uniform(-eps, eps) for k in range(2, 2 + n_modes)}
    prof = WallProfile.from_modes(m, amps)
    return close_profile(prof) if exact else prof


def generic_open_profile(m: int, seed: int) -> WallProfile:
    """Smooth positive dphi with no closure or symmetry constraints."""
    rng = np.random.default_rng(seed)
    grid = Grid(m)
    y = grid.shifted
    w = np.pi + 0.4 * np.sin(np.pi * y) + rng.uniform(-0.2, 0.2) * np.cos(
        2 * np.pi * y
    ) + rng.uniform(-0.15, 0.15) * np.sin(3 * np.pi * y)
    return WallProfile(grid, w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
