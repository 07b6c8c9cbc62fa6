"""Particle oracles: deterministic Cucker-Smale dynamics and a Langevin
scheme mirroring the stochastic characteristics of the Fokker-Planck
model.  Used to cross-validate the grid solvers at mean-field scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TorusGrid
from .kernels import KernelSpec, Mollifier
from .metrics import wasserstein_line, w1_periodic
from .transport import interp_periodic


@dataclass
class Swarm:
    masses: np.ndarray
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if np.any(self.masses <= 0):
            raise ValueError("particle masses must be positive")

    @property
    def n(self) -> int:
        return len(self.masses)

    def momentum(self) -> float:
        return float(np.sum(self.masses * self.v))

    def wrapped(self, length: float = 1.0) -> np.ndarray:
        return np.mod(self.x, length)


def _pairwise_accel(x: np.ndarray, v: np.ndarray, masses: np.ndarray,
                    phi: KernelSpec, length: float = 1.0) -> np.ndarray:
    """a_i = sum_j m_j phi(x_i - x_j)(v_j - v_i)."""
    dx = x[:, None] - x[None, :]
    W = masses[None, :] * phi.value(dx, length)
    return W @ v - v * W.sum(axis=1)


def step_cs(swarm: Swarm, phi: KernelSpec, dt: float,
            length: float = 1.0) -> Swarm:
    """One RK4 step of the Cucker-Smale system."""
    m = swarm.masses

    def deriv(x, v):
        return v, _pairwise_accel(x, v, m, phi, length)

    x, v = swarm.x, swarm.v
    k1x, k1v = deriv(x, v)
    k2x, k2v = deriv(x + dt / 2 * k1x, v + dt / 2 * k1v)
    k3x, k3v = deriv(x + dt / 2 * k2x, v + dt / 2 * k2v)
    k4x, k4v = deriv(x + dt * k3x, v + dt * k3v)
    return Swarm(masses=m,
                 x=x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
                 v=v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v))


def _step_rng(seed: int, step: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, step): reproducible and
    independent of execution order across steps."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed),
                                                counter=[0, 0, 0, np.uint64(step)]))


def step_langevin(swarm: Swarm, phi: KernelSpec | None, dt: float, *,
                  eps: float, sigma: float, seed: int, step: int,
                  u_delta_field: np.ndarray | None = None,
                  grid: TorusGrid | None = None,
                  psi: Mollifier | None = None,
                  length: float = 1.0) -> Swarm:
    """Euler-Maruyama step of the stochastic characteristic system

        dV = [(u rho)_phi(X) - rho_phi(X) V + (1/eps)(u_delta(X) - V)] dt
             + sqrt(2 sigma / eps) dB.

    The relaxation target u_delta comes either from a grid field
    (oracle mode) or, with a mollifier, self-consistently from the
    empirical measure.  eps = inf and sigma = 0 recover one explicit
    Euler step of the alignment force alone.
    """
    m, x, v = swarm.masses, swarm.x, swarm.v
    if phi is None:
        align = 0.0
    else:
        align = _pairwise_accel(x, v, m, phi, length)

    relax = 0.0
    if np.isfinite(eps):
        if u_delta_field is not None:
            if grid is None:
                raise ValueError("grid required with a field-based u_delta")
            ud = interp_periodic(x, u_delta_field, grid.cell_centers, grid.length)
        elif psi is not None:
            if grid is None:
                raise ValueError("grid required for the self-consistent mode")
            ud = _empirical_favre(swarm, psi, grid)
        else:
            raise ValueError("need u_delta_field or a mollifier")
        relax = (ud - v) / eps

    v_new = v + dt * (align + relax)
    if sigma > 0:
        if not np.isfinite(eps):
            raise ValueError("noise requires finite eps")
        rng = _step_rng(seed, step)
        v_new = v_new + np.sqrt(2 * sigma / eps * dt) * rng.standard_normal(len(v))
    return Swarm(masses=m, x=x + dt * v, v=v_new)


def _empirical_favre(swarm: Swarm, psi: Mollifier,
                     grid: TorusGrid) -> np.ndarray:
    """Favre-filtered velocity of the empirical measure, evaluated at the
    particles: bins atoms to the mollifier's grid, applies
    ((v rho)*psi / (rho*psi)) * psi, and interpolates back."""
    from .kernels import convolve_periodic
    n = grid.n_cells
    idx = np.floor(np.mod(swarm.x, grid.length) / grid.dx).astype(int)
    rho = np.bincount(idx, weights=swarm.masses, minlength=n) / grid.dx
    mom = np.bincount(idx, weights=swarm.masses * swarm.v, minlength=n) / grid.dx
    rho_psi = convolve_periodic(rho, psi.values, grid)
    mom_psi = convolve_periodic(mom, psi.values, grid)
    ratio_psi = convolve_periodic(mom_psi / rho_psi, psi.values, grid)
    return interp_periodic(swarm.x, ratio_psi, grid.cell_centers, grid.length)


def sample_from_grid(rho: np.ndarray, u: np.ndarray, grid: TorusGrid,
                     n: int, seed: int) -> Swarm:
    """Monokinetic swarm with positions drawn from the grid density."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    p = rho * grid.dx
    p = p / p.sum()
    cells = rng.choice(grid.n_cells, size=n, p=p)
    x = grid.cell_centers[cells] + grid.dx * (rng.random(n) - 0.5)
    v = interp_periodic(x, u, grid.cell_centers, grid.length)
    total = float(np.sum(rho) * grid.dx)
    return Swarm(masses=np.full(n, total / n), x=x, v=v)


def empirical_vs_grid(swarm: Swarm, rho: np.ndarray, u: np.ndarray,
                      grid: TorusGrid) -> tuple[float, float]:
    """(w1_x, w1_v_proj): spatial-marginal distance on the circle and a
    line distance between the velocity projections."""
    n = grid.n_cells
    idx = np.floor(swarm.wrapped(grid.length) / grid.dx).astype(int)
    rho_emp = np.bincount(idx, weights=swarm.masses, minlength=n) / grid.dx
    w1_x = w1_periodic(rho_emp, rho, grid)
    w1_v = wasserstein_line(swarm.v, swarm.masses, u, rho * grid.dx, p=1)
    return w1_x, w1_v
