"""Coupling function, stresses, forcing fields, velocity recovery."""

import numpy as np
import pytest

from morphosim.geometry import WallProfile, curvatures, curvatures_shifted
from morphosim.mechanics import (
    CouplingFunction,
    ModelParams,
    degree_of_nonlinearity,
    lambdas,
    recover_velocities,
    stresses,
    stresses_from_curvatures,
)

from conftest import random_closed_profile


def params_3d(**kw):
    defaults = dict(P=1.0, nu=0.5, d=4.0, dim=3, sigma=0.05)
    defaults.update(kw)
    return ModelParams(**defaults)


class TestCouplingFunction:
    def test_power_law_degree(self):
        for p in (0.5, 1.0, 4.0, 7.0):
            F = CouplingFunction.power(p)
            for mu in (0.3, 1.0, 2.5):
                assert degree_of_nonlinearity(F, mu) == pytest.approx(p)

    def test_constant_degree_zero(self):
        F = CouplingFunction.power(0.0)
        assert degree_of_nonlinearity(F, 1.7) == 0.0

    def test_exponential_degree(self):
        F = CouplingFunction(f=np.exp, df=np.exp, label="exp")
        assert degree_of_nonlinearity(F, 2.0) == pytest.approx(2.0)

    def test_zero_denominator(self):
        F = CouplingFunction(f=lambda mu: mu - 1.0, df=lambda mu: 1.0)
        with pytest.raises(ZeroDivisionError):
            degree_of_nonlinearity(F, 1.0)


class TestModelParams:
    def test_fixed_length_requires_sigma(self):
        with pytest.raises(ValueError, match="sigma"):
            ModelParams(P=1.0, nu=0.5, d=4.0, dim=3, inflating=False)

    def test_inflating_requires_rates(self):
        with pytest.raises(ValueError, match="gamma"):
            ModelParams(P=1.0, nu=0.5, d=4.0, dim=3, inflating=True,
                        alpha=1.0, beta=1.0)

    def test_sigma_shrinks_with_length(self):
        p = ModelParams(P=1.0, nu=0.5, d=4.0, dim=3, inflating=True,
                        gamma=0.1 / np.pi**2, alpha=1.0, beta=1.0 / np.pi**2)
        assert p.sigma_at(1.0) == pytest.approx(0.1)
        assert p.sigma_at(2.0) == pytest.approx(0.025)

    def test_mu_scale_dimension_dependence(self):
        common = dict(P=1.0, nu=0.5, d=2.0, inflating=True,
                      gamma=1.0, alpha=2.0, beta=3.0)
        p3 = ModelParams(dim=3, **common)
        p2 = ModelParams(dim=2, **common)
        assert p3.mu_scale(2.0) == pytest.approx(3 * np.pi**2 / (2 * 4.0))
        assert p2.mu_scale(2.0) == pytest.approx(3 * np.pi / (2 * 2.0))

    def test_fixed_length_normalization(self):
        p = params_3d()
        assert p.mu_scale(5.0) == 1.0
        assert p.radial_psi(5.0) == 1.0
        assert p.rate_prefactor(2.0) == pytest.approx(2.0)

    def test_nu_range(self):
        with pytest.raises(ValueError, match="Poisson"):
            params_3d(nu=1.0)


class TestStresses:
    def test_sphere_isotropic(self):
        L = np.pi  # unit sphere
        prof = WallProfile.sphere(100, L=L)
        P = 2.4
        s_s, s_t = stresses(prof, P)
        R = L / np.pi
        np.testing.assert_allclose(s_s, P * R / 2, rtol=1e-13)
        np.testing.assert_allclose(s_t, P * R / 2, rtol=1e-13)

    def test_cylinder_limit(self):
        # kappa_s = 0: hoop stress doubles the meridional one.
        R, P = 1.7, 3.0
        s_s, s_t = stresses_from_curvatures(np.zeros(4), np.full(4, 1 / R), P)
        np.testing.assert_allclose(s_s, P * R / 2)
        np.testing.assert_allclose(s_t, P * R)
        np.testing.assert_allclose(s_t, 2 * s_s)

    def test_matches_curve_oracle(self):
        # Stresses recomputed from curvatures of the finely reconstructed
        # (r, z) curve agree with the module values.
        m = 80
        amps = {2: 0.1, 3: -0.06, 4: 0.04}
        coarse = WallProfile.from_modes(m, amps)
        fine = WallProfile.from_modes(10 * (m + 1) - 1, amps)
        L = fine.L
        r = L * fine.icos_nodes
        z = L * fine.isin_nodes
        h = fine.grid.dx
        rp = np.gradient(r, h, edge_order=2)
        zp = np.gradient(z, h, edge_order=2)
        rpp = np.gradient(rp, h, edge_order=2)
        zpp = np.gradient(zp, h, edge_order=2)
        speed = np.hypot(rp, zp)
        ks_or = (rp * zpp - zp * rpp) / speed**3
        with np.errstate(divide="ignore"):
            kt_or = zp / (r * speed)
        P = 1.3
        s_s, s_t = stresses(coarse, P)
        s_s_or, s_t_or = stresses_from_curvatures(ks_or, kt_or, P)
        idx = 10 * np.arange(1, m + 1)
        assert np.max(np.abs(s_s[1:-1] - s_s_or[idx])) < 30 * coarse.grid.dx**2
        assert np.max(np.abs(s_t[1:-1] - s_t_or[idx])) < 30 * coarse.grid.dx**2


class TestLambdas:
    def test_sphere_lambda1_vanishes_exactly(self):
        prof = WallProfile.sphere(200, L=2.2)
        psi = np.ones(prof.grid.n_cells)
        lam1, _ = lambdas(prof, psi, params_3d())
        assert np.max(np.abs(lam1)) < 1e-12

    def test_sphere_lambda2_constant(self):
        L, P, nu = 1.8, 1.4, 0.35
        prof = WallProfile.sphere(150, L=L)
        psi = np.full(prof.grid.n_cells, 0.9)
        _, lam2 = lambdas(prof, psi, params_3d(P=P, nu=nu))
        expected = (1 - nu) * P * L * 0.9 / (2 * np.pi**2)
        np.testing.assert_allclose(lam2, expected, rtol=1e-12)

    def test_first_order_expansion_single_mode(self):
        # Finite-difference linearization in the perturbation amplitude
        # against the closed-form first-order fields (shape part only,
        # extensibility held at its radial value).
        m, k, nu, P = 256, 3, 0.4, 1.0
        eps = 1e-6
        pars = params_3d(P=P, nu=nu)
        sphere = WallProfile.sphere(m)
        pert = WallProfile.from_modes(m, {k: eps})
        psi = np.ones(sphere.grid.n_cells)
        lam1_0, lam2_0 = lambdas(sphere, psi, pars)
        lam1_1, lam2_1 = lambdas(pert, psi, pars)
        dlam1 = (lam1_1 - lam1_0) / eps
        dlam2 = (lam2_1 - lam2_0) / eps

        y = sphere.grid.shifted
        L = sphere.L
        J = 0.5 * (np.sin((k + 1) * np.pi * y) / ((k + 1) * np.pi)
                   + np.sin((k - 1) * np.pi * y) / ((k - 1) * np.pi))
        cosk = np.cos(k * np.pi * y)
        lam1_w = nu * (P / np.pi) * L * (-J / np.sin(np.pi * y) + cosk / np.pi)
        lam2_w = (P / (2 * np.pi**2)) * L * (
            (2 * nu - 1) * J / np.sin(np.pi * y) - cosk / np.pi
        )
        scale1 = np.max(np.abs(lam1_w))
        scale2 = np.max(np.abs(lam2_w))
        assert np.max(np.abs(dlam1 - lam1_w)) < 2e-3 * scale1
        assert np.max(np.abs(dlam2 - lam2_w)) < 2e-3 * scale2


class TestRecoverVelocities:
    def test_sphere_velocities(self):
        L, P, nu, psi_c = np.pi * 1.3, 1.1, 0.45, 1.0
        prof = WallProfile.sphere(180, L=L)
        psi = np.full(prof.grid.n_cells, psi_c)
        v_n, v_tau = recover_velocities(prof, psi, params_3d(P=P, nu=nu))
        R = L / np.pi
        np.testing.assert_allclose(v_tau, 0.0, atol=1e-12)
        np.testing.assert_allclose(v_n, P * (1 - nu) * psi_c * R**2 / 2,
                                   rtol=1e-12)

    def test_circle_normal_velocity(self):
        L, P, psi_c = np.pi * 0.8, 1.6, 1.0
        prof = WallProfile.sphere(120, L=L)
        psi = np.full(prof.grid.n_cells, psi_c)
        pars = ModelParams(P=P, nu=0.5, d=4.0, dim=2, sigma=0.05)
        v_n, v_tau = recover_velocities(prof, psi, pars)
        R = L / np.pi  # curvature kappa = pi/L
        np.testing.assert_allclose(v_n, psi_c * P * R**2, rtol=1e-12)
        np.testing.assert_allclose(v_tau, 0.0)

    @pytest.mark.parametrize("m", [200, 400])
    def test_constitutive_closure(self, m):
        # Strain rates recomputed from the recovered velocities through the
        # shell kinematics match Psi*(stress differences) at first order in
        # the grid spacing.
        prof = random_closed_profile(m=m, seed=12, eps=0.08)
        pars = params_3d(P=1.2, nu=0.3)
        psi = np.ones(prof.grid.n_cells)  # uniform extensibility
        v_n, v_tau = recover_velocities(prof, psi, pars)
        L = prof.L
        dx = prof.grid.dx

        ks, kt = curvatures(prof)
        s_s, s_t = stresses(prof, pars.P)
        dvtau_ds = np.gradient(v_tau, dx, edge_order=2) / L
        eps_s = v_n * ks + dvtau_ds
        r = L * prof.icos_nodes
        eps_t = np.empty_like(eps_s)
        eps_t[1:-1] = v_n[1:-1] * kt[1:-1] + v_tau[1:-1] * np.cos(
            prof.phi_nodes[1:-1]
        ) / r[1:-1]
        eps_t[0] = eps_t[1]
        eps_t[-1] = eps_t[-2]

        target_s = psi[0] * (s_s - pars.nu * s_t)
        target_t = psi[0] * (s_t - pars.nu * s_s)
        scale = np.max(np.abs(target_s))
        res_s = np.max(np.abs(eps_s - target_s)[1:-1]) / scale
        res_t = np.max(np.abs(eps_t - target_t)[1:-1]) / scale
        assert res_s < 40 * dx
        assert res_t < 40 * dx

    def test_closure_residual_shrinks_with_resolution(self):
        def residual(m):
            prof = random_closed_profile(m=m, seed=12, eps=0.08)
            pars = params_3d(P=1.2, nu=0.3)
            psi = np.ones(prof.grid.n_cells)
            v_n, v_tau = recover_velocities(prof, psi, pars)
            ks, kt = curvatures(prof)
            s_s, s_t = stresses(prof, pars.P)
            dvtau_ds = np.gradient(v_tau, prof.grid.dx, edge_order=2) / prof.L
            eps_s = v_n * ks + dvtau_ds
            target_s = s_s - pars.nu * s_t
            return np.max(np.abs(eps_s - target_s)[1:-1])

        assert residual(400) < 0.75 * residual(200)
