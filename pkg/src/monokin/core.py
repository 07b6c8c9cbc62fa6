"""Grids, field containers, quadrature, and run configuration.

All spatial fields live on a periodic cell-centered grid; kinetic
profiles live on the product of that grid with a truncated velocity
grid.  Fields are plain numpy arrays indexed ``[x]`` or ``[x, xi]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

SCENARIOS = ("eas", "profile", "vlasov", "fp", "characteristics", "particles", "sweep")
KERNEL_KINDS = ("const", "algebraic")
U0_PRESETS = ("sym", "asym", "zero")


class ConfigError(ValueError):
    """Raised for unparsable or invalid run configuration."""

    def __init__(self, message, field_name=None, line=None):
        self.field_name = field_name
        self.line = line
        super().__init__(message)


@dataclass(frozen=True)
class TorusGrid:
    """Periodic cell-centered grid on a circle of the given period."""

    n_cells: int
    length: float = 1.0

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError(f"n_cells must be >= 4, got {self.n_cells}")
        if self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class XiGrid:
    """Symmetric truncation of the velocity line, cell-centered.

    Requires an even cell count so centers come in +/- pairs and the
    mid face sits exactly at xi = 0.
    """

    n_cells: int
    xi_max: float = 8.0

    def __post_init__(self):
        if self.n_cells < 4 or self.n_cells % 2 != 0:
            raise ValueError(f"n_cells must be even and >= 4, got {self.n_cells}")
        if self.xi_max <= 0:
            raise ValueError(f"xi_max must be positive, got {self.xi_max}")

    @property
    def dxi(self) -> float:
        return 2.0 * self.xi_max / self.n_cells

    @property
    def cell_centers(self) -> np.ndarray:
        return -self.xi_max + (np.arange(self.n_cells) + 0.5) * self.dxi

    @property
    def faces(self) -> np.ndarray:
        """n_cells + 1 face coordinates, from -xi_max to +xi_max."""
        return -self.xi_max + np.arange(self.n_cells + 1) * self.dxi


@dataclass(frozen=True)
class PhaseGrid:
    x: TorusGrid
    xi: XiGrid

    @property
    def cell_measure(self) -> float:
        return self.x.dx * self.xi.dxi

    @property
    def shape(self) -> tuple[int, int]:
        return (self.x.n_cells, self.xi.n_cells)


@dataclass(frozen=True)
class MacroState:
    """Density/velocity snapshot; ``m`` is the modulated velocity when present."""

    rho: np.ndarray
    u: np.ndarray
    t: float = 0.0
    m: np.ndarray | None = None

    def validate(self, grid: TorusGrid):
        if self.rho.shape != (grid.n_cells,) or self.u.shape != (grid.n_cells,):
            raise ValueError("field shape does not match grid")
        if np.min(self.rho) < 0:
            raise ValueError("rho must be nonnegative")


@dataclass(frozen=True)
class Profile:
    """Nonnegative distribution g(x, xi) on a phase grid, shape [nx, nxi]."""

    g: np.ndarray
    t: float = 0.0

    def validate(self, grid: PhaseGrid):
        if self.g.shape != grid.shape:
            raise ValueError("profile shape does not match phase grid")
        if np.min(self.g) < 0:
            raise ValueError("g must be nonnegative")


@dataclass(frozen=True)
class ModulationParams:
    epsilon: float
    sigma: float
    delta: float
    alpha: float = 0.5

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")


@dataclass
class DiagnosticsRecord:
    """Named functional values sampled at one time."""

    t: float
    values: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, v in self.values.items():
            if not math.isfinite(v):
                raise ValueError(f"diagnostic {name!r} is not finite at t={self.t}")


def quadrature_x(f: np.ndarray, grid: TorusGrid) -> float:
    """Midpoint rule for the integral of a cell-averaged field over the torus."""
    return float(np.sum(f) * grid.dx)


def quadrature_phase(g: np.ndarray, grid: PhaseGrid) -> float:
    """Product midpoint rule over the phase grid."""
    return float(np.sum(g) * grid.cell_measure)


def xi_marginal(g: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Integrate g over xi, returning a density field on the torus grid."""
    return g.sum(axis=1) * grid.xi.dxi


def xi_first_moment(g: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    return (g * grid.xi.cell_centers[None, :]).sum(axis=1) * grid.xi.dxi


def xi_second_moment(g: np.ndarray, grid: PhaseGrid) -> float:
    return quadrature_phase(g * grid.xi.cell_centers[None, :] ** 2, grid)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

_REQUIRED_KEYS = ("scenario", "nx", "nxi", "xi_max", "t_final")

_INT_KEYS = {"nx", "nxi", "seed", "n_particles"}
_FLOAT_KEYS = {
    "xi_max", "t_final", "dt", "cfl", "epsilon", "sigma", "delta", "alpha",
    "kernel_beta", "sigma_g0",
}
_STR_KEYS = {"scenario", "kernel", "u0", "out_dir", "snapshot_times"}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


@dataclass
class RunConfig:
    scenario: str
    nx: int
    nxi: int
    xi_max: float
    t_final: float
    dt: float | None = None
    cfl: float | None = None
    epsilon: float = 0.1
    sigma: float = 0.1
    delta: float = 0.01
    alpha: float = 0.5
    kernel: str = "const"
    kernel_beta: float = 2.0
    u0: str = "sym"
    sigma_g0: float = 0.1
    out_dir: str = "out"
    seed: int = 0
    n_particles: int = 4096
    snapshot_times: tuple[float, ...] | None = None

    def torus_grid(self) -> TorusGrid:
        return TorusGrid(self.nx)

    def phase_grid(self) -> PhaseGrid:
        return PhaseGrid(TorusGrid(self.nx), XiGrid(self.nxi, self.xi_max))

    def resolved_snapshot_times(self) -> tuple[float, ...]:
        """Default mirrors a four-panel figure layout: 4 equally spaced times."""
        if self.snapshot_times is not None:
            return self.snapshot_times
        return tuple(np.linspace(0.0, self.t_final, 4))


def parse_kv_file(path) -> dict[str, str]:
    """Parse a flat ``key = value`` UTF-8 file with ``#`` comments."""
    entries: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}",
                              line=lineno)
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def _convert(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"field {key!r}: cannot parse {raw!r}", field_name=key)
    return raw


def validate_config(cfg: RunConfig) -> RunConfig:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(
            f"field 'scenario': unknown scenario {cfg.scenario!r}; "
            f"expected one of {', '.join(SCENARIOS)}", field_name="scenario")
    if cfg.nx < 4:
        raise ConfigError("field 'nx': must be >= 4", field_name="nx")
    if cfg.nxi < 4 or cfg.nxi % 2:
        raise ConfigError("field 'nxi': must be even and >= 4", field_name="nxi")
    if cfg.xi_max <= 0:
        raise ConfigError("field 'xi_max': must be positive", field_name="xi_max")
    if cfg.t_final <= 0:
        raise ConfigError("field 't_final': must be positive", field_name="t_final")
    if cfg.dt is None and cfg.cfl is None:
        cfg.cfl = 0.45
    if cfg.dt is not None and cfg.dt <= 0:
        raise ConfigError("field 'dt': must be positive", field_name="dt")
    if cfg.cfl is not None and not 0 < cfg.cfl <= 0.9:
        raise ConfigError("field 'cfl': must be in (0, 0.9]", field_name="cfl")
    if cfg.epsilon <= 0:
        raise ConfigError("field 'epsilon': must be positive", field_name="epsilon")
    if cfg.sigma < 0:
        raise ConfigError("field 'sigma': must be nonnegative", field_name="sigma")
    if cfg.scenario == "fp" and cfg.sigma == 0:
        raise ConfigError("field 'sigma': must be positive for the fp scenario",
                          field_name="sigma")
    if cfg.delta <= 0:
        raise ConfigError("field 'delta': must be positive", field_name="delta")
    if not 0 < cfg.alpha <= 1:
        raise ConfigError("field 'alpha': must be in (0, 1]", field_name="alpha")
    if cfg.kernel not in KERNEL_KINDS:
        raise ConfigError(f"field 'kernel': unknown kind {cfg.kernel!r}",
                          field_name="kernel")
    if cfg.kernel_beta <= 0:
        raise ConfigError("field 'kernel_beta': must be positive",
                          field_name="kernel_beta")
    if cfg.sigma_g0 <= 0:
        raise ConfigError("field 'sigma_g0': must be positive", field_name="sigma_g0")
    if cfg.u0 not in U0_PRESETS:
        # Treat anything else as a velocity expression in x; check it compiles.
        try:
            evaluate_u0(cfg.u0, np.array([0.0, 0.25]))
        except Exception as exc:
            raise ConfigError(f"field 'u0': bad expression {cfg.u0!r}: {exc}",
                              field_name="u0")
    return cfg


def load_config(path) -> RunConfig:
    """Load and fully validate a run configuration file."""
    entries = parse_kv_file(path)
    for key in _REQUIRED_KEYS:
        if key not in entries:
            raise ConfigError(f"missing required field {key!r}", field_name=key)
    for key in entries:
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown field {key!r}", field_name=key)
    kwargs = {k: _convert(k, v) for k, v in entries.items()}
    if "snapshot_times" in kwargs:
        try:
            kwargs["snapshot_times"] = tuple(
                float(s) for s in str(kwargs["snapshot_times"]).split(",") if s.strip()
            )
        except ValueError:
            raise ConfigError("field 'snapshot_times': expected comma-separated reals",
                              field_name="snapshot_times")
    cfg = RunConfig(**kwargs)
    return validate_config(cfg)


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

def u0_symmetric(x: np.ndarray) -> np.ndarray:
    """Single-mode velocity with odd symmetry about its zeros at x = 1/4, 3/4."""
    return np.cos(2 * np.pi * x) / (3 * np.pi)


def u0_asymmetric(x: np.ndarray) -> np.ndarray:
    """Six-mode velocity with no odd symmetry about its zeros."""
    return 0.25 * (
        np.sin(2 * np.pi * x) / (2 * np.pi)
        + np.cos(2 * np.pi * x) / (3 * np.pi)
        + np.sin(4 * np.pi * x) / (2 * np.pi)
        + np.cos(4 * np.pi * x) / (4 * np.pi)
        + np.sin(6 * np.pi * x) / (8 * np.pi)
        + np.cos(6 * np.pi * x) / (5 * np.pi)
    )


_EXPR_NAMES = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "abs": np.abs, "pi": np.pi,
}


def evaluate_u0(spec: str, x: np.ndarray) -> np.ndarray:
    """Evaluate a velocity preset name or a numpy expression in ``x``."""
    if spec == "sym":
        return u0_symmetric(x)
    if spec == "asym":
        return u0_asymmetric(x)
    if spec == "zero":
        return np.zeros_like(x)
    value = eval(spec, {"__builtins__": {}}, {**_EXPR_NAMES, "x": x})
    return np.broadcast_to(np.asarray(value, dtype=float), x.shape).copy()


def gaussian_profile(grid: PhaseGrid, variance: float,
                     rho: np.ndarray | None = None,
                     mean: float = 0.0) -> np.ndarray:
    """rho(x) times a Gaussian in xi sampled at cell centers."""
    xi = grid.xi.cell_centers
    gauss = np.exp(-((xi - mean) ** 2) / (2 * variance)) / np.sqrt(2 * np.pi * variance)
    # renormalize the discrete profile so the xi-marginal is exactly rho
    gauss = gauss / (gauss.sum() * grid.xi.dxi)
    if rho is None:
        rho = np.ones(grid.x.n_cells)
    return rho[:, None] * gauss[None, :]


def initial_macro_state(cfg: RunConfig) -> MacroState:
    x = cfg.torus_grid().cell_centers
    return MacroState(rho=np.ones_like(x), u=evaluate_u0(cfg.u0, x), t=0.0)


__all__ = [
    "ConfigError", "TorusGrid", "XiGrid", "PhaseGrid", "MacroState", "Profile",
    "ModulationParams", "DiagnosticsRecord", "RunConfig",
    "quadrature_x", "quadrature_phase", "xi_marginal", "xi_first_moment",
    "xi_second_moment", "load_config", "validate_config", "parse_kv_file",
    "u0_symmetric", "u0_asymmetric", "evaluate_u0", "gaussian_profile",
    "initial_macro_state", "replace",
]
