import numpy as np
import pytest

from monokin.core import (RunConfig, quadrature_phase, validate_config,
                          xi_first_moment, xi_marginal)
from monokin.kernels import KernelSpec
from monokin.profile_transport import ProfileState, step_profile
from monokin.vlasov import (SupportError, VlasovModState, init_vlasov,
                            kinetic_stress, momentum_residual, omega_of,
                            run_vlasov, step_vlasov_mod)


def make_cfg(**over):
    base = dict(scenario="vlasov", nx=32, nxi=32, xi_max=4.0, t_final=0.3,
                u0="sym", epsilon=0.2, sigma_g0=0.1)
    base.update(over)
    return validate_config(RunConfig(**base))


class TestOmega:
    def test_initial_value(self):
        assert omega_of(0.37, 0.0) == pytest.approx(0.37)

    def test_closed_form_values(self):
        assert omega_of(0.1, 0.1) == pytest.approx(0.1 * np.exp(-1), rel=1e-14)
        assert omega_of(0.1, 1.0) == pytest.approx(0.1 * np.exp(-10), rel=1e-12)

    def test_state_omega_matches_closed_form(self):
        cfg = make_cfg()
        run = run_vlasov(cfg)
        for s in run.states:
            assert abs(s.omega - s.epsilon * np.exp(-s.t / s.epsilon)) <= 1e-14


class TestInit:
    def test_marginal_is_uniform(self):
        cfg = make_cfg()
        pg = cfg.phase_grid()
        st = init_vlasov(cfg, 0.1, pg)
        assert np.allclose(xi_marginal(st.g, pg), 1.0, atol=1e-8)
        assert np.allclose(st.m, np.cos(2 * np.pi * pg.x.cell_centers)
                           / (3 * np.pi), atol=1e-14)

    def test_support_violation(self):
        cfg = make_cfg(xi_max=0.5, nxi=8, sigma_g0=0.5)
        with pytest.raises(SupportError):
            init_vlasov(cfg, 0.1, cfg.phase_grid())


class TestStep:
    def test_mass_conserved_per_step(self):
        cfg = make_cfg()
        pg = cfg.phase_grid()
        kern = KernelSpec("const").tabulate(pg.x)
        st = init_vlasov(cfg, 0.2, pg)
        m0 = quadrature_phase(st.g, pg)
        for _ in range(20):
            st = step_vlasov_mod(st, 1e-3, pg, kern, m0)
            assert quadrature_phase(st.g, pg) == pytest.approx(m0, abs=1e-12)

    def test_symmetry_fixed_point(self):
        cfg = make_cfg(u0="zero")
        run = run_vlasov(cfg)
        s = run.states[-1]
        assert np.max(np.abs(s.m)) < 1e-8
        assert np.max(np.abs(xi_first_moment(s.g, run.grid))) < 1e-8

    def test_moment_identity_by_construction(self):
        cfg = make_cfg()
        run = run_vlasov(cfg)
        s = run.states[-1]
        pg = run.grid
        rho = s.rho(pg)
        lhs = rho * s.u(pg)
        rhs = rho * s.m + s.omega * xi_first_moment(s.g, pg)
        assert np.allclose(lhs, rhs, atol=1e-14)

    def test_limit_regime_matches_profile_step(self):
        # t >> eps: omega ~ 0 and the relaxation forcing vanishes, so one
        # step must coincide with the profile solver at matched coefficients
        cfg = make_cfg()
        pg = cfg.phase_grid()
        kern = KernelSpec("const").tabulate(pg.x)
        st0 = init_vlasov(cfg, 0.01, pg)
        st = VlasovModState(g=st0.g, m=st0.m, epsilon=0.01, t=0.5)
        m0 = quadrature_phase(st.g, pg)
        out = step_vlasov_mod(st, 1e-3, pg, kern, m0)
        ps = step_profile(ProfileState(g=st.g.copy(), t=0.5), st.m,
                          np.ones(cfg.nx), 1e-3, pg, m0)
        assert np.max(np.abs(out.g - ps.g)) < 1e-6


class TestStress:
    def test_initial_gaussian_moment(self):
        cfg = make_cfg(nxi=128)
        pg = cfg.phase_grid()
        st = init_vlasov(cfg, 0.1, pg)
        R = kinetic_stress(st, pg)
        # omega(0)^2 times variance times mass
        assert R == pytest.approx(0.01 * 0.1, rel=1e-3)

    def test_vanishes_for_large_time(self):
        cfg = make_cfg(t_final=1.0, epsilon=0.05)
        run = run_vlasov(cfg)
        assert kinetic_stress(run.states[-1], run.grid) <= 1e-10

    def test_nonnegative(self):
        cfg = make_cfg()
        run = run_vlasov(cfg)
        for s in run.states:
            assert kinetic_stress(s, run.grid) >= 0


class TestMomentumEquation:
    def test_residual_shrinks_under_refinement(self):
        res = []
        for nx, dt in ((32, 2e-3), (64, 1e-3)):
            cfg = make_cfg(nx=nx, nxi=64, dt=dt)
            pg = cfg.phase_grid()
            kern = KernelSpec("const").tabulate(pg.x)
            s = init_vlasov(cfg, 0.2, pg)
            m0 = quadrature_phase(s.g, pg)
            s1 = step_vlasov_mod(s, dt, pg, kern, m0)
            s2 = step_vlasov_mod(s1, dt, pg, kern, m0)
            res.append(momentum_residual(s1, s2, pg, kern))
        assert res[1] < 0.7 * res[0]
