"""Characteristic ODEs of the kinetic profile equation.

Includes the variational (tangent) system whose determinant obeys a
closed-form identity, the backward push-forward reconstruction used as a
semi-Lagrangian oracle for the grid solver, and exponential squeeze-rate
fits for unidirectional flocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .core import PhaseGrid, TorusGrid
from .transport import centered_dx, interp_periodic


class TimeRangeError(ValueError):
    pass


class CoefficientTrajectory:
    """Time-stamped macroscopic coefficients (u, rho_phi) on a torus grid.

    Space interpolation: periodic cubic for u (smoothness for RK4),
    linear for rho_phi (already mollified).  Linear interpolation in time
    between snapshots.
    """

    def __init__(self, times, u, rho_phi, grid: TorusGrid,
                 interp: str = "spline"):
        self.times = np.asarray(times, dtype=float)
        self.u = np.asarray(u, dtype=float)
        self.rho_phi = np.asarray(rho_phi, dtype=float)
        self.grid = grid
        if self.u.shape != (len(self.times), grid.n_cells):
            raise ValueError("u history shape mismatch")
        if interp not in ("spline", "spectral"):
            raise ValueError(f"unknown interpolation {interp!r}")
        self.interp = interp
        self._splines: dict[int, CubicSpline] = {}
        self._modes: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self.drho_phi = np.array([centered_dx(r, grid.dx) for r in self.rho_phi])

    @classmethod
    def constant(cls, u_field, rho_phi_field, grid: TorusGrid,
                 t_max: float = np.inf, interp: str = "spline"):
        t1 = 1e6 if not np.isfinite(t_max) else t_max
        return cls([0.0, t1], [u_field, u_field],
                   [rho_phi_field, rho_phi_field], grid, interp=interp)

    @classmethod
    def from_run(cls, run, interp: str = "spline"):
        """Build from an EasRun or ProfileRun-like object."""
        if hasattr(run, "u_hist"):
            return cls(run.times, run.u_hist, run.rho_phi_hist, run.grid.x,
                       interp=interp)
        return cls(run.times, run.u, run.rho_phi, run.grid, interp=interp)

    def _spline(self, k: int) -> CubicSpline:
        if k not in self._splines:
            g = self.grid
            xs = np.append(g.cell_centers, g.cell_centers[0] + g.length)
            ys = np.append(self.u[k], self.u[k][0])
            self._splines[k] = CubicSpline(xs, ys, bc_type="periodic")
        return self._splines[k]

    def _bracket(self, t: float):
        times = self.times
        if t < times[0] - 1e-9 or t > times[-1] + 1e-9:
            raise TimeRangeError(
                f"t={t} outside coefficient range [{times[0]}, {times[-1]}]")
        k = int(np.searchsorted(times, t, side="right")) - 1
        k = max(0, min(k, len(times) - 2))
        w = (t - times[k]) / max(times[k + 1] - times[k], 1e-30)
        return k, float(np.clip(w, 0.0, 1.0))

    def _wrap(self, x):
        g = self.grid
        c0 = g.cell_centers[0]
        return np.mod(np.asarray(x) - c0, g.length) + c0

    def _trig(self, k: int):
        """Fourier modes of the k-th u snapshot (trigonometric interpolant,
        C-infinity in x; preferred when checking RK4 order)."""
        if k not in self._modes:
            n = self.grid.n_cells
            coef = np.fft.rfft(self.u[k]) / n
            freq = 2 * np.pi * np.arange(len(coef)) / self.grid.length
            self._modes[k] = (coef, freq)
        return self._modes[k]

    def _eval_snapshot(self, k: int, xm, nu: int):
        if self.interp == "spline":
            return self._spline(k)(xm, nu)
        coef, freq = self._trig(k)
        # account for the half-cell offset of cell centers
        phase = np.exp(1j * np.outer(np.asarray(xm) - self.grid.cell_centers[0],
                                     freq))
        c = (coef * (1j * freq) ** nu).copy()
        c[1:] *= 2  # rfft halves the non-zero modes
        if self.grid.n_cells % 2 == 0:
            c[-1] = 0.0  # drop the ambiguous Nyquist mode
        return (phase @ c).real

    def u_at(self, t, x, nu: int = 0):
        k, w = self._bracket(t)
        xm = self._wrap(x)
        return (1 - w) * self._eval_snapshot(k, xm, nu) \
            + w * self._eval_snapshot(k + 1, xm, nu)

    def rho_phi_at(self, t, x):
        k, w = self._bracket(t)
        g = self.grid
        a = interp_periodic(x, self.rho_phi[k], g.cell_centers, g.length)
        b = interp_periodic(x, self.rho_phi[k + 1], g.cell_centers, g.length)
        return (1 - w) * a + w * b

    def drho_phi_at(self, t, x):
        k, w = self._bracket(t)
        g = self.grid
        a = interp_periodic(x, self.drho_phi[k], g.cell_centers, g.length)
        b = interp_periodic(x, self.drho_phi[k + 1], g.cell_centers, g.length)
        return (1 - w) * a + w * b


@dataclass
class CharTrajectory:
    """Batched characteristic trajectories sampled at every RK4 step."""

    times: np.ndarray            # [nt]
    x: np.ndarray                # [nt, B]
    sigma: np.ndarray            # [nt, B, d]
    weight_integral: np.ndarray  # [nt, B], integral of rho_phi along the path
    jacobian_det: np.ndarray | None = None  # [nt, B]

    @property
    def n_dim(self) -> int:
        return self.sigma.shape[2]


def _omega(eps, t):
    return eps * np.exp(-t / eps) if eps is not None else 0.0


def integrate_characteristics(coeffs: CoefficientTrajectory, x0, xi0,
                              t_final: float, dt: float, *, t0: float = 0.0,
                              eps: float | None = None,
                              variational: bool = False) -> CharTrajectory:
    """RK4 integration of the characteristic system.

    State per trajectory: position X, xi-vector Sigma, the accumulated
    integral of rho_phi(X), and (optionally, 1-D only) the 2x2 tangent
    matrix whose determinant is checked against the closed form.
    With ``eps`` set, the position also drifts with omega(t) Sigma_1
    (the pre-limit variant); the coefficient fields are then the
    modulated velocity and filtered density of that system.
    """
    X = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    S = np.asarray(xi0, dtype=float)
    if S.ndim == 0:
        S = S[None, None]
    elif S.ndim == 1:
        S = S[:, None]
    S = S.copy()
    B, d = S.shape
    if len(X) != B:
        raise ValueError("x0 and xi0 batch sizes differ")
    if variational and d != 1:
        raise ValueError("variational system is implemented for d = 1")

    I = np.zeros(B)
    J = np.tile(np.eye(2), (B, 1, 1)) if variational else None

    n_steps = max(1, int(round(abs(t_final - t0) / dt)))
    h = (t_final - t0) / n_steps

    def deriv(t, X, S, I, J):
        u = coeffs.u_at(t, X)
        du = coeffs.u_at(t, X, nu=1)
        rph = coeffs.rho_phi_at(t, X)
        om = _omega(eps, t)
        dX = u + om * S[:, 0]
        dS = -rph[:, None] * S
        dS[:, 0] -= du * S[:, 0]
        dI = rph
        dJ = None
        if J is not None:
            d2u = coeffs.u_at(t, X, nu=2)
            drph = coeffs.drho_phi_at(t, X)
            dJ = np.empty_like(J)
            # rows: (X, Sigma); columns: sensitivities to (x0, xi0)
            dJ[:, 0, :] = du[:, None] * J[:, 0, :] + om * J[:, 1, :]
            dJ[:, 1, :] = (-(d2u + drph) * S[:, 0])[:, None] * J[:, 0, :] \
                - (du + rph)[:, None] * J[:, 1, :]
        return dX, dS, dI, dJ

    nt = n_steps + 1
    times = t0 + h * np.arange(nt)
    xs = np.empty((nt, B))
    ss = np.empty((nt, B, d))
    Is = np.empty((nt, B))
    dets = np.empty((nt, B)) if variational else None

    def record(k):
        xs[k] = X
        ss[k] = S
        Is[k] = I
        if variational:
            dets[k] = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]

    record(0)
    t = t0
    for k in range(1, nt):
        k1 = deriv(t, X, S, I, J)
        k2 = deriv(t + h / 2, X + h / 2 * k1[0], S + h / 2 * k1[1],
                   I + h / 2 * k1[2],
                   None if J is None else J + h / 2 * k1[3])
        k3 = deriv(t + h / 2, X + h / 2 * k2[0], S + h / 2 * k2[1],
                   I + h / 2 * k2[2],
                   None if J is None else J + h / 2 * k2[3])
        k4 = deriv(t + h, X + h * k3[0], S + h * k3[1], I + h * k3[2],
                   None if J is None else J + h * k3[3])
        X = X + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        S = S + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        I = I + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if J is not None:
            J = J + h / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        t = t0 + h * k
        record(k)

    return CharTrajectory(times=times, x=xs, sigma=ss, weight_integral=Is,
                          jacobian_det=dets)


def jacobian_identity_check(traj: CharTrajectory) -> float:
    """Max relative deviation of det(tangent) from exp(-n * integral rho_phi)."""
    if traj.jacobian_det is None:
        raise ValueError("trajectory was integrated without the tangent system")
    expected = np.exp(-traj.n_dim * traj.weight_integral)
    return float(np.max(np.abs(traj.jacobian_det - expected) / expected))


def _interp_profile(g0: np.ndarray, X: np.ndarray, XI: np.ndarray,
                    grid: PhaseGrid) -> tuple[np.ndarray, int]:
    """Bilinear sample of g0: periodic in x, zero beyond the xi box."""
    nx, nxi = g0.shape
    dx, dxi = grid.x.dx, grid.xi.dxi
    sx = (X - grid.x.cell_centers[0]) / dx
    ix = np.floor(sx).astype(int)
    wx = sx - ix
    sxi = (XI - grid.xi.cell_centers[0]) / dxi
    jx = np.floor(sxi).astype(int)
    wxi = sxi - jx

    inside = (sxi >= -0.5) & (sxi <= nxi - 0.5)
    exits = int(np.sum(~inside))
    jl = np.clip(jx, -1, nxi - 1)
    jr = jl + 1

    def cell(i, j):
        vals = np.zeros_like(X)
        ok = (j >= 0) & (j < nxi)
        vals[ok] = g0[np.mod(i[ok], nx), j[ok]]
        return vals

    out = ((1 - wx) * (1 - wxi) * cell(ix, jl)
           + wx * (1 - wxi) * cell(ix + 1, jl)
           + (1 - wx) * wxi * cell(ix, jr)
           + wx * wxi * cell(ix + 1, jr))
    out[~inside] = 0.0
    return out, exits


def pushforward_reconstruct(g0: np.ndarray, coeffs: CoefficientTrajectory,
                            t: float, grid: PhaseGrid,
                            dt: float = 1e-3) -> tuple[np.ndarray, int]:
    """Reconstruct g at time t by tracing grid nodes back to t = 0.

    The value is the initial profile at the foot of the characteristic
    times the exponential of the accumulated rho_phi integral.  Returns
    the profile and the count of feet that left the xi box.
    """
    xs = grid.x.cell_centers
    xis = grid.xi.cell_centers
    X0, XI0 = np.meshgrid(xs, xis, indexing="ij")
    traj = integrate_characteristics(coeffs, X0.ravel(), XI0.ravel(),
                                     t_final=0.0, dt=dt, t0=t)
    Xb = traj.x[-1]
    Sb = traj.sigma[-1, :, 0]
    # signed integral along t -> 0 equals minus the forward integral
    weight = np.exp(-traj.weight_integral[-1])
    vals, exits = _interp_profile(g0, Xb, Sb, grid)
    g = (vals * weight).reshape(grid.shape)
    return g, exits


def squeeze_rate(times: np.ndarray, sigma: np.ndarray,
                 skip_fraction: float = 0.1) -> tuple[float, float]:
    """Least-squares slope of log |Sigma| over the post-transient window."""
    norms = np.linalg.norm(np.atleast_2d(sigma.T).T, axis=-1) \
        if sigma.ndim > 1 else np.abs(sigma)
    t0 = times[0] + skip_fraction * (times[-1] - times[0])
    mask = (times >= t0) & (norms > 1e-300)
    if np.sum(mask) < 3:
        raise ValueError("not enough points in the fit window")
    tt = times[mask]
    yy = np.log(norms[mask])
    slope, intercept = np.polyfit(tt, yy, 1)
    resid = yy - (slope * tt + intercept)
    ss_tot = float(np.sum((yy - yy.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / max(ss_tot, 1e-300)
    return float(slope), r2
