"""Quasi-stationary growth-material density on the wall.

The density mu solves a Helmholtz-type elliptic problem on the unit interval
with zero-flux ends, sourced by the wall curvature.  In the planar (2D)
variant the operator is the plain second derivative; in the axisymmetric
(3D) variant the drift term cos(phi)/Icos is absorbed by rewriting the
operator in divergence form with weight Icos, which keeps the discrete
system symmetric positive definite and pole-safe (the weight vanishes at the
poles).  Both solvers reduce to a single tridiagonal solve per call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .geometry import InvalidProfileError, WallProfile


@dataclass(frozen=True)
class GrowthField:
    """Nondimensional density mu on the shifted grid with its diffusion sigma."""

    profile: WallProfile
    mu: np.ndarray
    sigma: float

    @property
    def grid(self):
        return self.profile.grid


def solve_mu_2d(profile: WallProfile, sigma: float,
                source: np.ndarray | None = None) -> GrowthField:
    """Solve -(sigma/pi^2) mu'' + mu = dphi/pi with zero-flux ends.

    The operator is discretized on the shifted grid with reflecting ghost
    cells, which makes the discrete boundary fluxes exactly zero and the
    matrix symmetric positive definite.  ``source`` overrides the right-hand
    side (used for manufactured-solution studies).
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    n = profile.grid.n_cells
    dx = profile.grid.dx
    rhs = profile.dphi / np.pi if source is None else np.asarray(source, float)
    if rhs.shape != (n,):
        raise ValueError(f"source must have shape ({n},), got {rhs.shape}")

    c = sigma / (np.pi * dx) ** 2
    # Symmetric banded storage (upper form) for solveh_banded.
    ab = np.zeros((2, n))
    ab[0, 1:] = -c
    ab[1, :] = 1.0 + 2.0 * c
    ab[1, 0] = 1.0 + c
    ab[1, -1] = 1.0 + c
    mu = solveh_banded(ab, rhs)
    return GrowthField(profile, mu, float(sigma))


def solve_mu_3d(profile: WallProfile, sigma: float,
                source: np.ndarray | None = None) -> GrowthField:
    """Solve the axisymmetric surface problem for mu in weighted form.

    Multiplying the equation by the weight Icos turns the operator into
    -(sigma/pi^2) d/dx(Icos dmu/dx) + Icos mu and the natural boundary
    condition into a vanishing weighted flux, which holds automatically at
    the poles where Icos -> 0.  The default right-hand side is the
    curvature source dphi*sin(phi)/(pi^2*Icos), evaluated at cell centers.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    n = profile.grid.n_cells
    dx = profile.grid.dx

    ic_nodes = profile.icos_nodes.copy()
    ic_cells = profile.icos_shifted
    if np.any(ic_cells <= 0.0) or np.any(ic_nodes[1:-1] <= 0.0):
        raise InvalidProfileError(
            "Icos must stay positive away from the poles to solve for mu"
        )
    # Weighted zero-flux ends: Icos(0) = 0 exactly; the far-end weight is the
    # closure defect and the boundary flux is imposed to vanish regardless.
    ic_nodes[0] = 0.0
    ic_nodes[-1] = 0.0

    if source is None:
        rhs = profile.dphi * np.sin(profile.phi_shifted) / (np.pi**2 * ic_cells)
    else:
        rhs = np.asarray(source, float)
        if rhs.shape != (n,):
            raise ValueError(f"source must have shape ({n},), got {rhs.shape}")

    c = sigma / (np.pi * dx) ** 2
    ab = np.zeros((2, n))
    ab[0, 1:] = -c * ic_nodes[1:-1]
    ab[1, :] = ic_cells + c * (ic_nodes[:-1] + ic_nodes[1:])
    mu = solveh_banded(ab, rhs * ic_cells)
    return GrowthField(profile, mu, float(sigma))


def solve_mu(profile: WallProfile, sigma: float, dim: int) -> GrowthField:
    """Dispatch to the planar or axisymmetric solver."""
    if dim == 2:
        return solve_mu_2d(profile, sigma)
    if dim == 3:
        return solve_mu_3d(profile, sigma)
    raise ValueError(f"dim must be 2 or 3, got {dim}")
