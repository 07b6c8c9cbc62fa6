"""Communication kernels, periodized algebraic mollifiers, and the
density-weighted velocity filter.

The mollifier is ``psi(x) = c / (1 + x^2)^((1+alpha)/2)`` on the line,
periodized by a lattice sum and re-normalized to unit mass on the torus.
The slow algebraic tail is handled with a closed-form integral correction
so truncation error sits below 1e-14.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import TorusGrid, quadrature_x


class UnderResolvedMollifierError(ValueError):
    """The mollifier varies by more than 1000x between adjacent cells."""


@dataclass(frozen=True)
class KernelSpec:
    """Radially symmetric communication kernel on the torus."""

    kind: str = "const"  # const | algebraic
    beta: float = 2.0
    normalized: bool = False

    def __post_init__(self):
        if self.kind not in ("const", "algebraic"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    def value(self, r: np.ndarray, length: float = 1.0) -> np.ndarray:
        """Kernel value at displacement r, using the periodic distance."""
        r = np.asarray(r, dtype=float)
        r_per = np.abs(np.mod(r + 0.5 * length, length) - 0.5 * length)
        if self.kind == "const":
            return np.ones_like(r_per)
        return (1.0 + r_per**2) ** (-self.beta / 2.0)

    def tabulate(self, grid: TorusGrid) -> np.ndarray:
        """Values at displacements m*dx for m = 0..n-1."""
        vals = self.value(np.arange(grid.n_cells) * grid.dx, grid.length)
        if self.normalized:
            vals = vals / quadrature_x(vals, grid)
        return vals


@dataclass(frozen=True)
class Mollifier:
    delta: float
    alpha: float
    values: np.ndarray  # tabulated at displacements m*dx, unit mass on the torus
    norm_const: float   # line normalization of the unperiodized kernel


def convolve_periodic(field: np.ndarray, kernel: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Discrete circular convolution scaled by dx.

    Direct summation at desk scale; FFT fast path for large grids
    (identical result to rounding).
    """
    n = grid.n_cells
    if field.shape != (n,) or kernel.shape != (n,):
        raise ValueError("field/kernel shape does not match grid")
    if n <= 1024:
        idx = np.mod(np.arange(n)[:, None] - np.arange(n)[None, :], n)
        return grid.dx * (kernel[idx] @ field)
    out = np.fft.ifft(np.fft.fft(field) * np.fft.fft(kernel)).real
    return grid.dx * out


def _tail_integral(z: np.ndarray, alpha: float) -> np.ndarray:
    """Integral of (1 + y^2)^(-(1+alpha)/2) over (z, infinity) for z >= 0."""
    w = 1.0 / (1.0 + z**2)
    return 0.5 * special.betainc(alpha / 2.0, 0.5, w) * special.beta(alpha / 2.0, 0.5)


def build_mollifier(delta: float, alpha: float, grid: TorusGrid,
                    n_lattice: int = 1000) -> Mollifier:
    """Periodized, unit-mass tabulation of the algebraic mollifier."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    L = grid.length
    x = np.arange(grid.n_cells) * grid.dx
    x = np.mod(x + 0.5 * L, L) - 0.5 * L  # representative in [-L/2, L/2)

    p = (1.0 + alpha) / 2.0
    k = np.arange(-n_lattice, n_lattice + 1)
    y = (x[:, None] + L * k[None, :]) / delta
    vals = np.sum((1.0 + y**2) ** (-p), axis=1) / delta

    # Algebraic tails: midpoint Euler-Maclaurin with closed-form integral.
    for sgn in (+1.0, -1.0):
        z = (sgn * x + L * (n_lattice + 0.5)) / delta
        vals += _tail_integral(z, alpha) / L
        # first derivative correction of the midpoint rule
        fprime = -(1.0 + alpha) * z * (1.0 + z**2) ** (-(3.0 + alpha) / 2.0)
        vals += (L / delta**2) * fprime / 24.0

    c = 1.0 / special.beta(alpha / 2.0, 0.5)
    vals = c * vals

    ratio = np.minimum(vals, np.roll(vals, -1)) / np.maximum(vals, np.roll(vals, -1))
    if np.min(ratio) < 1e-3:
        raise UnderResolvedMollifierError(
            f"mollifier with delta={delta} is unresolved on a {grid.n_cells}-cell grid "
            f"(adjacent-cell ratio {np.min(ratio):.2e})")

    vals = vals / quadrature_x(vals, grid)  # re-normalize on the torus
    return Mollifier(delta=delta, alpha=alpha, values=vals, norm_const=c)


def favre_filter(u: np.ndarray, rho: np.ndarray, psi: Mollifier,
                 grid: TorusGrid) -> np.ndarray:
    """Density-weighted filtered velocity ((u rho)*psi / (rho*psi)) * psi.

    Well-defined at vacuum: rho*psi is bounded below by mass times the
    mollifier's strictly positive minimum.
    """
    mass = quadrature_x(rho, grid)
    if mass <= 0:
        raise ValueError("rho must have positive total mass")
    num = convolve_periodic(u * rho, psi.values, grid)
    den = convolve_periodic(rho, psi.values, grid)
    return convolve_periodic(num / den, psi.values, grid)


def _weighted_inner(a: np.ndarray, b: np.ndarray, rho: np.ndarray,
                    grid: TorusGrid) -> float:
    return quadrature_x(a * b * rho, grid)


def discrete_lipschitz(u: np.ndarray, grid: TorusGrid) -> float:
    """Max slope between adjacent cells, periodic."""
    return float(np.max(np.abs(np.roll(u, -1) - u)) / grid.dx)


def favre_properties_check(u: np.ndarray, rho: np.ndarray, psi: Mollifier,
                           grid: TorusGrid,
                           test_fields: list[np.ndarray] | None = None) -> dict:
    """Numerical check of the filter's structural properties.

    Returns the worst rho-weighted symmetry defect over a set of test
    fields, the positive-semidefiniteness residual, and the L1(rho)
    approximation error together with the discrete Lipschitz constant
    of u (the error should scale like delta times that constant).
    """
    x = grid.cell_centers
    if test_fields is None:
        test_fields = [
            np.ones_like(x),
            np.cos(2 * np.pi * x),
            np.sin(2 * np.pi * x),
            np.cos(4 * np.pi * x),
        ]
    u_d = favre_filter(u, rho, psi, grid)
    sym = 0.0
    for v in test_fields:
        v_d = favre_filter(v, rho, psi, grid)
        sym = max(sym, abs(_weighted_inner(u_d, v, rho, grid)
                           - _weighted_inner(u, v_d, rho, grid)))
    psd = _weighted_inner(u_d, u, rho, grid) - _weighted_inner(u_d, u_d, rho, grid)
    l1_err = quadrature_x(np.abs(u_d - u) * rho, grid)
    return {
        "symmetry_residual": sym,
        "psd_residual": psd,
        "l1_error": l1_err,
        "lipschitz": discrete_lipschitz(u, grid),
        "max_slope_filtered": discrete_lipschitz(u_d, grid),
    }
