"""Constitutive coupling: extensibility, stresses, forcing terms, velocities.

The wall extensibility is a function of the growth-material density,
Psi = F(mu), with F increasing (a power law mu^d by default).  Pressure
balance fixes the stresses from the principal curvatures, and the two
forcing fields Lambda1/Lambda2 condense the stress and kinematic relations
into the coefficients the evolution equation consumes.  Both are evaluated
through the product u = Icosin * dphi, in the factored forms

    Lambda1 = (P L Psi / 2) * Icosin * (u - 1) * (u - 1 + 2 nu)
    Lambda2 = (P L Psi / 2) * Icosin^2 * ((2 - nu) - u)

whose (u - 1) factor makes the exact vanishing of Lambda1 on the sphere a
computed zero rather than a cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import (
    WallProfile,
    curvatures,
    dphi_nodes,
    icosin,
    icosin_shifted,
)


@dataclass(frozen=True)
class CouplingFunction:
    """Increasing map from growth-material density to extensibility."""

    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"

    @classmethod
    def power(cls, d: float) -> "CouplingFunction":
        return cls(
            f=lambda mu, d=d: np.power(mu, d),
            df=lambda mu, d=d: d * np.power(mu, d - 1.0) if d != 0.0
            else np.zeros_like(np.asarray(mu, dtype=float)),
            label=f"mu^{d:g}",
        )

    def __call__(self, mu):
        return self.f(mu)


def degree_of_nonlinearity(F: CouplingFunction, mu: float) -> float:
    """Logarithmic derivative F'(mu) mu / F(mu); equals p for F = mu^p."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    value = float(np.asarray(F.f(mu)))
    if value == 0.0:
        raise ZeroDivisionError(f"F({mu}) = 0; degree of nonlinearity undefined")
    return float(np.asarray(F.df(mu))) * mu / value


@dataclass(frozen=True)
class ModelParams:
    """Physical and nondimensional parameters of the growth model.

    Quasi-stationary (fixed length) runs specify the reduced diffusion
    ``sigma`` directly and normalize the radial density to one.  Inflating
    runs specify (gamma, alpha, beta); sigma and the physical density scale
    then depend on the current length.
    """

    P: float = 1.0
    nu: float = 0.5
    d: float = 4.0
    dim: int = 3
    inflating: bool = False
    sigma: float | None = None
    gamma: float | None = None
    alpha: float | None = None
    beta: float | None = None
    coupling: CouplingFunction | None = None

    def __post_init__(self):
        if not self.P > 0:
            raise ValueError(f"turgor pressure must be positive, got {self.P}")
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"Poisson ratio must lie in (0, 1), got {self.nu}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.inflating:
            for name in ("gamma", "alpha", "beta"):
                value = getattr(self, name)
                if value is None or not value > 0:
                    raise ValueError(
                        f"inflating mode needs positive {name}, got {value}"
                    )
        else:
            if self.sigma is None or not self.sigma > 0:
                raise ValueError(
                    f"fixed-length mode needs positive sigma, got {self.sigma}"
                )

    @property
    def coupling_fn(self) -> CouplingFunction:
        return self.coupling if self.coupling is not None else CouplingFunction.power(self.d)

    def degree(self, mu: float) -> float:
        return degree_of_nonlinearity(self.coupling_fn, mu)

    def sigma_at(self, L: float) -> float:
        """Reduced diffusion coefficient; shrinks as the wall lengthens."""
        if self.inflating:
            return self.gamma * np.pi**2 / (self.alpha * L**2)
        return float(self.sigma)

    def mu_scale(self, L: float) -> float:
        """Physical density per unit of the nondimensional one."""
        if not self.inflating:
            return 1.0
        if self.dim == 3:
            return self.beta * np.pi**2 / (self.alpha * L**2)
        return self.beta * np.pi / (self.alpha * L)

    def psi_from_mu(self, mu_tilde: np.ndarray, L: float) -> np.ndarray:
        """Extensibility field from the nondimensional density."""
        return self.coupling_fn(self.mu_scale(L) * np.asarray(mu_tilde))

    def radial_psi(self, L: float) -> float:
        """Extensibility of the exact radial solution at length L."""
        return float(np.asarray(self.coupling_fn(self.mu_scale(L))))

    def rate_prefactor(self, L: float) -> float:
        """P * L * F(radial density): the scale of all modal growth rates."""
        return self.P * L * self.radial_psi(L)


# -- stresses ---------------------------------------------------------------


def stresses_from_curvatures(kappa_s: np.ndarray, kappa_theta: np.ndarray,
                             P: float) -> tuple[np.ndarray, np.ndarray]:
    """Pressure balance of a thin shell: meridional and hoop stress."""
    sigma_s = P / (2.0 * kappa_theta)
    sigma_theta = sigma_s * (2.0 - kappa_s / kappa_theta)
    return sigma_s, sigma_theta


def stresses(profile: WallProfile, P: float) -> tuple[np.ndarray, np.ndarray]:
    """Stresses at the nodes (poles handled through the curvature limits)."""
    kappa_s, kappa_theta = curvatures(profile)
    return stresses_from_curvatures(kappa_s, kappa_theta, P)


# -- forcing fields ---------------------------------------------------------


def _psi_to_nodes(psi: np.ndarray) -> np.ndarray:
    out = np.empty(psi.size + 1)
    out[0], out[-1] = psi[0], psi[-1]
    out[1:-1] = 0.5 * (psi[:-1] + psi[1:])
    return out


def lambdas(
    profile: WallProfile,
    psi: np.ndarray,
    params: ModelParams,
    where: str = "shifted",
) -> tuple[np.ndarray, np.ndarray]:
    """Forcing fields (Lambda1, Lambda2) on cells or interpolated to nodes.

    ``psi`` is the extensibility on the shifted grid.  On the exact sphere
    u = 1 identically, so Lambda1 vanishes at machine precision and Lambda2
    reduces to the constant (1 - nu) P L Psi / (2 pi^2).
    """
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (profile.grid.n_cells,):
        raise ValueError("psi must live on the shifted grid")
    nu = params.nu
    if where == "shifted":
        I = icosin_shifted(profile)
        w = profile.dphi
        psi_loc = psi
    elif where == "nodes":
        I = icosin(profile)
        w = dphi_nodes(profile)
        psi_loc = _psi_to_nodes(psi)
    else:
        raise ValueError(f"where must be 'shifted' or 'nodes', got {where!r}")
    if not np.all(np.isfinite(I)):
        raise ValueError("non-finite Icosin; profile angle left (0, pi)")
    pref = 0.5 * params.P * profile.L * psi_loc
    u = I * w
    lam1 = pref * I * (u - 1.0) * (u - 1.0 + 2.0 * nu)
    lam2 = pref * I**2 * ((2.0 - nu) - u)
    return lam1, lam2


# -- velocity recovery ------------------------------------------------------


def recover_velocities(
    profile: WallProfile,
    psi: np.ndarray,
    params: ModelParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Normal and tangential wall velocities at the nodes (diagnostic).

    3D: v_tau solves the tangential balance by its integrating factor,
    v_tau = L sin(phi) int_0^x Lambda1/sin(phi) dx', and the normal balance
    gives v_n = -cot(phi) v_tau + L Lambda2, evaluated here as
    -L cos(phi) int_0^x Lambda1/sin(phi) dx' + L Lambda2 so the poles need
    no limit handling.  (The minus sign follows from the hoop-strain
    balance; the recomputed-strain-rate test below pins it.)  The time
    stepper never uses these; they close the constitutive loop in tests.
    2D: v_n = Psi P / kappa^2 and v_tau = 0.
    """
    psi = np.asarray(psi, dtype=float)
    L = profile.L
    if params.dim == 2:
        w_bar = dphi_nodes(profile)
        psi_nodes = _psi_to_nodes(psi)
        v_n = psi_nodes * params.P * L**2 / w_bar**2
        return v_n, np.zeros_like(v_n)

    lam1, _ = lambdas(profile, psi, params, where="shifted")
    _, lam2_nodes = lambdas(profile, psi, params, where="nodes")
    integrand = lam1 / np.sin(profile.phi_shifted)
    integral = np.empty(profile.grid.m + 2)
    integral[0] = 0.0
    np.cumsum(integrand * profile.grid.dx, out=integral[1:])
    phi = profile.phi_nodes
    v_tau = L * np.sin(phi) * integral
    v_n = -L * np.cos(phi) * integral + L * lam2_nodes
    return v_n, v_tau
