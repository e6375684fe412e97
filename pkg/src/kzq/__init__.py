"""Linear quenches of the transverse-field Ising chain in free-fermion form.

Per-mode Landau-Zener dynamics are integrated numerically and checked
against parabolic-cylinder solutions and brute-force state vectors; the
defect density, kink-kink correlations and post-quench magnetization are
compared with closed-form regime formulas.
"""
from importlib.metadata import PackageNotFoundError, version

from .integrator import (
    ExcitationSpectrum,
    IntegrationError,
    IntegratorConfig,
    ModeAmplitudes,
    evolve_mode,
    evolve_modes,
    excitation_probability,
    spectrum,
)
from .model import MomentumGrid, QuenchProtocol, dispersion, ramp_value
from .observables import (
    CorrelatorSet,
    KinkCorrelation,
    OscillationParams,
    kink_correlations,
    kink_density,
    kink_kink,
    magnetization_params,
    quadratic_correlators,
)
from .regimes import RegimeLabel, TurningPoints, classify, density_kz, density_ps, density_s, turning_points

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

__all__ = [
    "ExcitationSpectrum",
    "IntegrationError",
    "IntegratorConfig",
    "ModeAmplitudes",
    "evolve_mode",
    "evolve_modes",
    "excitation_probability",
    "spectrum",
    "MomentumGrid",
    "QuenchProtocol",
    "dispersion",
    "ramp_value",
    "CorrelatorSet",
    "KinkCorrelation",
    "OscillationParams",
    "kink_correlations",
    "kink_density",
    "kink_kink",
    "magnetization_params",
    "quadratic_correlators",
    "RegimeLabel",
    "TurningPoints",
    "classify",
    "density_kz",
    "density_ps",
    "density_s",
    "turning_points",
]
