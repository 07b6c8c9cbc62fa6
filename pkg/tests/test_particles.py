import numpy as np
import pytest

from monokin.core import TorusGrid, initial_macro_state, RunConfig, validate_config
from monokin.kernels import KernelSpec, build_mollifier
from monokin.particles import (Swarm, empirical_vs_grid, sample_from_grid,
                               step_cs, step_langevin)


def two_body():
    return Swarm(masses=np.array([0.5, 0.5]), x=np.array([0.1, 0.6]),
                 v=np.array([1.0, -1.0]))


class TestCuckerSmale:
    def test_two_body_closed_form(self):
        sw = two_body()
        phi = KernelSpec("const")
        for _ in range(1000):
            sw = step_cs(sw, phi, 1e-3)
        assert sw.v[0] == pytest.approx(np.exp(-1.0), abs=1e-8)
        assert sw.v[1] == pytest.approx(-np.exp(-1.0), abs=1e-8)

    def test_momentum_conserved(self):
        rng = np.random.default_rng(4)
        n = 32
        m = rng.random(n)
        m /= m.sum()
        sw = Swarm(masses=m, x=rng.random(n), v=rng.standard_normal(n))
        p0 = sw.momentum()
        phi = KernelSpec("algebraic", beta=2.0)
        for _ in range(1000):
            sw = step_cs(sw, phi, 1e-3)
        assert abs(sw.momentum() - p0) <= 1e-12

    def test_velocity_diameter_monotone(self):
        rng = np.random.default_rng(8)
        n = 16
        sw = Swarm(masses=np.full(n, 1.0 / n), x=rng.random(n),
                   v=rng.standard_normal(n))
        phi = KernelSpec("const")
        diam = np.ptp(sw.v)
        for _ in range(200):
            sw = step_cs(sw, phi, 1e-3)
            new = np.ptp(sw.v)
            assert new <= diam + 1e-12
            diam = new

    def test_positive_masses_required(self):
        with pytest.raises(ValueError):
            Swarm(masses=np.array([0.0, 1.0]), x=np.zeros(2), v=np.zeros(2))


class TestLangevin:
    def test_degenerate_limit_matches_cs(self):
        sw = two_body()
        phi = KernelSpec("const")
        dt = 1e-5
        a = step_cs(sw, phi, dt)
        b = step_langevin(sw, phi, dt, eps=np.inf, sigma=0.0, seed=0, step=0)
        assert np.max(np.abs(a.v - b.v)) <= 1e-10
        assert np.max(np.abs(a.x - b.x)) <= 1e-10

    def test_bitwise_reproducible(self):
        grid = TorusGrid(64)
        uz = np.zeros(64)
        rng = np.random.default_rng(0)
        sw = Swarm(masses=np.full(100, 0.01), x=rng.random(100),
                   v=rng.standard_normal(100))
        runs = []
        for _ in range(2):
            s = sw
            for k in range(10):
                s = step_langevin(s, None, 1e-2, eps=1.0, sigma=0.2, seed=42,
                                  step=k, u_delta_field=uz, grid=grid)
            runs.append(s)
        assert np.array_equal(runs[0].v, runs[1].v)
        assert np.array_equal(runs[0].x, runs[1].x)

    def test_ou_stationary_variance(self):
        n, sigma = 10**4, 0.1
        grid = TorusGrid(64)
        uz = np.zeros(64)
        sw = Swarm(masses=np.full(n, 1.0 / n),
                   x=np.random.default_rng(0).random(n), v=np.zeros(n))
        for k in range(1000):
            sw = step_langevin(sw, None, 1e-2, eps=1.0, sigma=sigma, seed=11,
                               step=k, u_delta_field=uz, grid=grid)
        var = np.var(sw.v)
        assert abs(var - sigma) / sigma <= 3 / np.sqrt(n)

    def test_self_consistent_mode_runs(self):
        grid = TorusGrid(64)
        psi = build_mollifier(0.1, 0.5, grid)
        rng = np.random.default_rng(1)
        sw = Swarm(masses=np.full(200, 1.0 / 200), x=rng.random(200),
                   v=rng.standard_normal(200) * 0.1)
        out = step_langevin(sw, KernelSpec("const"), 1e-3, eps=0.5, sigma=0.05,
                            seed=5, step=0, psi=psi, grid=grid)
        assert np.all(np.isfinite(out.v))


class TestEmpirical:
    def test_sampling_error_bound(self):
        cfg = validate_config(RunConfig(scenario="particles", nx=64, nxi=8,
                                        xi_max=4, t_final=0.1))
        grid = cfg.torus_grid()
        macro = initial_macro_state(cfg)
        n = 4096
        sw = sample_from_grid(macro.rho, macro.u, grid, n, seed=0)
        w1x, w1v = empirical_vs_grid(sw, macro.rho, macro.u, grid)
        assert w1x <= 4 / np.sqrt(n)
        assert w1v <= 0.05  # monokinetic sampling: interpolation error only

    def test_w1x_decreases_with_n(self):
        cfg = validate_config(RunConfig(scenario="particles", nx=64, nxi=8,
                                        xi_max=4, t_final=0.1))
        grid = cfg.torus_grid()
        macro = initial_macro_state(cfg)
        means = []
        for n in (512, 4096):
            vals = [empirical_vs_grid(sample_from_grid(macro.rho, macro.u,
                                                       grid, n, seed=s),
                                      macro.rho, macro.u, grid)[0]
                    for s in range(8)]
            means.append(np.mean(vals))
        assert means[1] < means[0]
