"""monokin: a numerical laboratory for modulated kinetic alignment systems.

Solvers for the pressureless Euler-alignment system, its limiting
kinetic profile equation, and the modulated Vlasov and Fokker-Planck
families that converge to it; characteristic-flow integration,
Wasserstein/entropy diagnostics, and particle oracles.
"""

from .core import (ConfigError, MacroState, PhaseGrid, Profile, RunConfig,
                   TorusGrid, XiGrid, load_config)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "MacroState", "PhaseGrid", "Profile", "RunConfig",
    "TorusGrid", "XiGrid", "load_config", "__version__",
]
