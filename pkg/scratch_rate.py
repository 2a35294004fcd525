"""Scratch: linearized modal rates of the 3D evolution around the sphere."""
import numpy as np
from morphosim.geometry import WallProfile, icosin, icosin_shifted
from morphosim.growth_field import solve_mu_3d


def w_rhs(profile, sigma, d, nu):
    """d(dphi)/dt for the fixed-length axisymmetric system (centered diffs)."""
    g = profile.grid
    dx = g.dx
    w = profile.dphi
    P = 1.0
    L = 1.0
    PL = P * L
    mu = solve_mu_3d(profile, sigma).mu
    psi = mu**d

    # cell quantities
    I_sh = icosin_shifted(profile)
    u_sh = I_sh * w
    lam1_sh = 0.5 * PL * psi * I_sh * (u_sh - 1.0) * (u_sh - 1.0 + 2 * nu)
    lam2_sh = 0.5 * PL * psi * I_sh**2 * ((2.0 - nu) - u_sh)

    # advection coefficient at nodes, re-anchored so a(0) = a(1) = 0
    gint = lam1_sh + lam2_sh * w
    A = np.concatenate([[0.0], np.cumsum(gint) * dx])
    a = g.nodes * A[-1] - A

    # node quantities
    I_nd = icosin(profile)
    w_nd = np.empty(g.m + 2)
    w_nd[0], w_nd[-1] = w[0], w[-1]
    w_nd[1:-1] = 0.5 * (w[:-1] + w[1:])
    psi_nd = np.empty(g.m + 2)
    psi_nd[0], psi_nd[-1] = psi[0], psi[-1]
    psi_nd[1:-1] = 0.5 * (psi[:-1] + psi[1:])
    u_nd = I_nd * w_nd
    lam1_nd = 0.5 * PL * psi_nd * I_nd * (u_nd - 1.0) * (u_nd - 1.0 + 2 * nu)

    phi = profile.phi_nodes
    c = np.zeros(g.m + 2)
    cot = np.cos(phi[1:-1]) / np.sin(phi[1:-1])
    c[1:-1] = cot * lam1_nd[1:-1] - (lam2_sh[1:] - lam2_sh[:-1]) / dx

    # phi-dot at nodes; poles pinned
    phidot = np.zeros(g.m + 2)
    phidot[1:-1] = a[1:-1] * w_nd[1:-1] + c[1:-1]
    return (phidot[1:] - phidot[:-1]) / dx


def modal_rate(k, sigma, d, nu, m, eps=1e-7):
    prof = WallProfile.from_modes(m, {k: eps})
    v = np.cos(k * np.pi * prof.grid.shifted)
    dwdt = w_rhs(prof, sigma, d, nu)
    return 2.0 * prof.grid.dx * np.sum(dwdt * v) / eps


def N3(k, sigma, d, nu):
    n0 = (1 - nu) * (1 - 2 * d)
    n1 = -(1 - nu) * (sigma + d) + 1
    n2 = -nu * sigma - 1 + (1 - nu) * d
    n3 = 2 * sigma
    n4 = -sigma
    return n0 + n1 * k + n2 * k**2 + n3 * k**3 + n4 * k**4


def D3(k, sigma):
    return np.pi * (sigma * k**2 - sigma * k + 1)


sigma, d, nu = 0.05, 4.0, 0.5
print("k | measured (m=1024, 2048, extrap) | N(k)/D(k) | N(k+1)/D(k+1)")
for k in (2, 3, 4, 5):
    r1 = modal_rate(k, sigma, d, nu, 1024)
    r2 = modal_rate(k, sigma, d, nu, 2048)
    extrap = r2 + (r2 - r1) / 3.0  # second-order Richardson
    print(f"{k} | {r1:.6f} {r2:.6f} {extrap:.6f} | "
          f"{N3(k,sigma,d,nu)/D3(k,sigma):.6f} | {N3(k+1,sigma,d,nu)/D3(k+1,sigma):.6f}")
