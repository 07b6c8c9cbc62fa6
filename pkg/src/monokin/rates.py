"""Rate-fitting helpers for convergence sweeps.

Measured errors against a fixed-resolution reference sit on top of a
discretization floor; the floor-corrected fit models err = C eps^p + b
and reports p, which is what theory bounds.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.optimize import OptimizeWarning, brentq, curve_fit


def sigma_from_eps(eps: float) -> float:
    """Solve sigma * log(1/sigma) = eps on (0, 1/e).

    The left side increases from 0 to 1/e on that interval, so the root
    is unique; eps must be below 1/e.
    """
    if not 0 < eps < 1 / np.e:
        raise ValueError(f"eps={eps} outside (0, 1/e)")
    return float(brentq(lambda s: s * np.log(1 / s) - eps, 1e-300, 1 / np.e,
                        xtol=1e-300, rtol=4 * np.finfo(float).eps))


def loglog_slope(eps: np.ndarray, err: np.ndarray) -> float:
    """Plain least-squares slope of log err vs log eps."""
    eps = np.asarray(eps, dtype=float)
    err = np.asarray(err, dtype=float)
    return float(np.polyfit(np.log(eps), np.log(err), 1)[0])


def loglog_slope_floor(eps, err) -> dict:
    """Fit err = C eps^p + floor; fall back to the plain slope.

    Returns dict with slope (p), floor, r2, and the plain slope for
    reference.
    """
    eps = np.asarray(eps, dtype=float)
    err = np.asarray(err, dtype=float)
    plain = loglog_slope(eps, err)
    out = {"slope": plain, "floor": 0.0, "r2": np.nan, "plain_slope": plain}
    if len(eps) < 3:
        return out

    def model(e, logc, p, b):
        return np.exp(logc) * e**p + b

    try:
        p0 = (np.log(max(err.max(), 1e-300)), max(plain, 0.1), 0.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(model, eps, err, p0=p0,
                                bounds=([-50, 0.0, 0.0], [50, 4.0, err.min()
                                                          + 1e-300]),
                                maxfev=20000)
        pred = model(eps, *popt)
        ss_res = float(np.sum((err - pred) ** 2))
        ss_tot = float(np.sum((err - err.mean()) ** 2))
        out.update(slope=float(popt[1]), floor=float(popt[2]),
                   r2=1.0 - ss_res / max(ss_tot, 1e-300))
    except (RuntimeError, ValueError):
        pass
    return out


def slope_confidence(eps, err) -> tuple[float, float]:
    """Plain slope with a 95 percent half-width from the linear fit."""
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.asarray(err, dtype=float))
    n = len(x)
    coef, cov = np.polyfit(x, y, 1, cov=True) if n > 2 else \
        (np.polyfit(x, y, 1), np.full((2, 2), np.nan))
    half = 1.96 * np.sqrt(cov[0, 0]) if np.all(np.isfinite(cov)) else np.nan
    return float(coef[0]), float(half)
