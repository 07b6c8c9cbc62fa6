import numpy as np
import pytest

from monokin.core import (RunConfig, gaussian_profile, quadrature_phase,
                          validate_config, xi_first_moment, xi_second_moment)
from monokin.profile_transport import (ProfileState, initial_profile,
                                       marginal_consistency, run_profile,
                                       step_profile)
from monokin.transport import BoundaryLeakError


def make_cfg(**over):
    base = dict(scenario="profile", nx=32, nxi=32, xi_max=4.0, t_final=0.5,
                u0="sym", sigma_g0=0.1)
    base.update(over)
    return validate_config(RunConfig(**base))


class TestStep:
    def test_mass_conserved_and_positive(self):
        cfg = make_cfg()
        pg = cfg.phase_grid()
        ps = ProfileState(g=initial_profile(cfg, pg), t=0.0)
        mass0 = quadrature_phase(ps.g, pg)
        u = 0.1 * np.sin(2 * np.pi * pg.x.cell_centers)
        rph = np.ones(cfg.nx)
        for _ in range(50):
            ps = step_profile(ps, u, rph, 1e-3, pg, mass0)
        assert quadrature_phase(ps.g, pg) == pytest.approx(mass0, abs=1e-12)
        assert np.min(ps.g) >= 0

    def test_leak_guard(self):
        # expansion flow (negative e-coefficient) pushes mass outward
        cfg = make_cfg(nxi=16, xi_max=1.0, sigma_g0=0.2)
        pg = cfg.phase_grid()
        ps = ProfileState(g=initial_profile(cfg, pg), t=0.0)
        mass0 = quadrature_phase(ps.g, pg)
        u = np.zeros(cfg.nx)
        rph = -np.ones(cfg.nx)
        with pytest.raises(BoundaryLeakError):
            for _ in range(2000):
                ps = step_profile(ps, u, rph, 1e-3, pg, mass0)


class TestContraction:
    def test_second_moment_law_under_refinement(self):
        # u=0, rho=1, phi=1: g(t) = e^t g0(x, e^t xi), M2(t) = M2(0) e^{-2t}
        errs = []
        for nx, nxi, dt in ((32, 64, 2e-3), (64, 128, 1e-3)):
            cfg = make_cfg(nx=nx, nxi=nxi, xi_max=2.0, u0="zero")
            pg = cfg.phase_grid()
            g = gaussian_profile(pg, 0.1)
            ps = ProfileState(g=g, t=0.0)
            mass0 = quadrature_phase(g, pg)
            u = np.zeros(nx)
            rph = np.ones(nx)
            n = int(round(0.5 / dt))
            for _ in range(n):
                ps = step_profile(ps, u, rph, dt, pg, mass0)
            m2 = xi_second_moment(ps.g, pg)
            exact = xi_second_moment(g, pg) * np.exp(-1.0)
            errs.append(abs(m2 - exact) / exact)
        assert errs[1] < 0.7 * errs[0]  # first-order O(dxi + dt)


class TestCoupledRun:
    def test_snapshots_at_requested_times(self):
        cfg = make_cfg(snapshot_times=(0.0, 0.2, 0.5))
        run = run_profile(cfg)
        assert run.snapshot_times == [0.0, 0.2, 0.5]
        assert [s.t for s in run.snapshots] == pytest.approx([0.0, 0.2, 0.5],
                                                             abs=1e-9)

    def test_marginal_tracks_macroscopic_density(self):
        cfg = make_cfg()
        run = run_profile(cfg)
        for ps, eas in zip(run.snapshots, run.macro_snapshots):
            assert marginal_consistency(ps, eas.rho, run.grid) < 1e-10

    def test_centering_preserved_for_zero_velocity(self):
        cfg = make_cfg(u0="zero")
        run = run_profile(cfg)
        mom = xi_first_moment(run.snapshots[-1].g, run.grid)
        assert np.max(np.abs(mom)) < 1e-10

    def test_mass_conservation_through_run(self):
        cfg = make_cfg()
        run = run_profile(cfg)
        m0 = quadrature_phase(run.snapshots[0].g, run.grid)
        m1 = quadrature_phase(run.snapshots[-1].g, run.grid)
        assert m1 == pytest.approx(m0, abs=1e-11)

    def test_xi_variance_contracts(self):
        cfg = make_cfg(t_final=1.0)
        run = run_profile(cfg)
        m2_0 = xi_second_moment(run.snapshots[0].g, run.grid)
        m2_1 = xi_second_moment(run.snapshots[-1].g, run.grid)
        assert m2_1 < 0.5 * m2_0
