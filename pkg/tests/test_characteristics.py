import numpy as np
import pytest

from monokin.characteristics import (CharTrajectory, CoefficientTrajectory,
                                     TimeRangeError, integrate_characteristics,
                                     jacobian_identity_check,
                                     pushforward_reconstruct, squeeze_rate)
from monokin.core import RunConfig, TorusGrid, quadrature_phase, validate_config
from monokin.profile_transport import run_profile


def constant_coeffs(nx=64, amp=0.3, interp="spline"):
    g = TorusGrid(nx)
    u = amp * np.sin(2 * np.pi * g.cell_centers)
    rph = np.ones(nx)
    return CoefficientTrajectory.constant(u, rph, g, interp=interp), g


class TestCoefficients:
    def test_spectral_interpolation_exact_on_modes(self):
        co, g = constant_coeffs(interp="spectral")
        x = np.linspace(0, 1, 37)
        assert np.allclose(co.u_at(0.0, x), 0.3 * np.sin(2 * np.pi * x),
                           atol=1e-12)
        assert np.allclose(co.u_at(0.0, x, nu=1),
                           0.6 * np.pi * np.cos(2 * np.pi * x), atol=1e-10)

    def test_spline_matches_nodes(self):
        co, g = constant_coeffs()
        assert np.allclose(co.u_at(0.0, g.cell_centers),
                           0.3 * np.sin(2 * np.pi * g.cell_centers),
                           atol=1e-12)

    def test_time_range_error(self):
        co, _ = constant_coeffs()
        with pytest.raises(TimeRangeError):
            co.u_at(2e6, np.array([0.5]))


class TestIntegration:
    def test_uniform_drift(self):
        g = TorusGrid(32)
        co = CoefficientTrajectory.constant(np.full(32, 0.25), np.zeros(32), g)
        tr = integrate_characteristics(co, np.array([0.1]), np.array([1.0]),
                                       1.0, 1e-2)
        assert tr.x[-1, 0] == pytest.approx(0.35, abs=1e-10)
        assert tr.sigma[-1, 0, 0] == pytest.approx(1.0, abs=1e-10)

    def test_constant_damping_closed_form(self):
        # u = 0, rho_phi = c: Sigma(t) = Sigma(0) e^{-ct}
        g = TorusGrid(32)
        c = 0.8
        co = CoefficientTrajectory.constant(np.zeros(32), np.full(32, c), g)
        tr = integrate_characteristics(co, np.array([0.3]), np.array([2.0]),
                                       1.5, 1e-3)
        assert tr.sigma[-1, 0, 0] == pytest.approx(2.0 * np.exp(-c * 1.5),
                                                   rel=1e-10)

    def test_rk4_order_ratio(self):
        co, _ = constant_coeffs(interp="spectral")
        x0 = np.array([0.13, 0.41, 0.77])
        xi0 = np.array([0.5, -0.3, 1.0])

        def endpoint(dt):
            tr = integrate_characteristics(co, x0, xi0, 1.0, dt)
            return np.concatenate([tr.x[-1], tr.sigma[-1, :, 0]])

        ref = endpoint(1e-3 / 8)
        e1 = np.abs(endpoint(4e-2) - ref).max()
        e2 = np.abs(endpoint(2e-2) - ref).max()
        assert 14 <= e1 / e2 <= 18

    def test_backward_forward_inverse(self):
        co, _ = constant_coeffs()
        x0 = np.array([0.2, 0.6])
        xi0 = np.array([1.0, -0.5])
        fwd = integrate_characteristics(co, x0, xi0, 1.0, 1e-3)
        back = integrate_characteristics(co, fwd.x[-1], fwd.sigma[-1, :, 0],
                                         0.0, 1e-3, t0=1.0)
        assert np.allclose(back.x[-1], x0, atol=1e-9)
        assert np.allclose(back.sigma[-1, :, 0], xi0, atol=1e-9)

    def test_multidimensional_sigma_damping(self):
        g = TorusGrid(32)
        co = CoefficientTrajectory.constant(np.zeros(32), np.full(32, 1.0), g)
        xi0 = np.array([[1.0, 2.0, -1.0]])
        tr = integrate_characteristics(co, np.array([0.5]), xi0, 1.0, 1e-3)
        assert tr.n_dim == 3
        assert np.allclose(tr.sigma[-1, 0], xi0[0] * np.exp(-1.0), rtol=1e-9)


class TestJacobianIdentity:
    def test_residual_on_coupled_run(self):
        cfg = validate_config(RunConfig(scenario="profile", nx=64, nxi=32,
                                        xi_max=4.0, t_final=0.5, u0="sym",
                                        dt=1e-3))
        run = run_profile(cfg)
        co = CoefficientTrajectory.from_run(run)
        rng = np.random.default_rng(2)
        tr = integrate_characteristics(co, rng.random(10),
                                       rng.random(10) - 0.5, 0.5, 1e-3,
                                       variational=True)
        assert jacobian_identity_check(tr) <= 1e-6

    def test_requires_variational_flag(self):
        co, _ = constant_coeffs()
        tr = integrate_characteristics(co, np.array([0.1]), np.array([1.0]),
                                       0.1, 1e-2)
        with pytest.raises(ValueError):
            jacobian_identity_check(tr)


class TestPushforward:
    def test_reconstructs_grid_solution(self):
        cfg = validate_config(RunConfig(scenario="profile", nx=32, nxi=32,
                                        xi_max=4.0, t_final=0.3, u0="sym",
                                        sigma_g0=0.1))
        run = run_profile(cfg)
        co = CoefficientTrajectory.from_run(run)
        k = run.snapshot_times.index(0.3)
        g_rec, exits = pushforward_reconstruct(run.snapshots[0].g, co, 0.3,
                                               run.grid, dt=2e-3)
        l1 = np.abs(g_rec - run.snapshots[k].g).sum() * run.grid.cell_measure
        assert l1 < 0.25  # first-order grid error dominates
        assert exits < run.grid.shape[0] * run.grid.shape[1] // 3

    def test_mass_approximately_conserved(self):
        cfg = validate_config(RunConfig(scenario="profile", nx=32, nxi=48,
                                        xi_max=4.0, t_final=0.2, u0="sym"))
        run = run_profile(cfg)
        co = CoefficientTrajectory.from_run(run)
        g_rec, _ = pushforward_reconstruct(run.snapshots[0].g, co, 0.2,
                                           run.grid, dt=2e-3)
        m = quadrature_phase(g_rec, run.grid)
        assert m == pytest.approx(1.0, abs=0.05)


class TestSqueezeRate:
    def test_exact_exponential(self):
        t = np.linspace(0, 2, 200)
        sig = 3.0 * np.exp(-1.3 * t)
        rate, r2 = squeeze_rate(t, sig)
        assert rate == pytest.approx(-1.3, rel=1e-8)
        assert r2 > 0.999999

    def test_window_excludes_transient(self):
        t = np.linspace(0, 2, 400)
        sig = np.exp(-t) * (1 + 5 * np.exp(-40 * t))
        rate, r2 = squeeze_rate(t, sig)
        assert rate == pytest.approx(-1.0, abs=0.02)
        assert r2 > 0.999
