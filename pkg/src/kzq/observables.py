"""Quadratic correlators and the observables built from them.

The diagonal and off-diagonal correlators

    alpha_R = (2/N) sum_{q>0} |u_q|^2 cos(qR)
    beta_R  = (2/N) sum_{q>0} u_q v_q^* sin(qR)

determine the kink density, the connected kink-kink correlator and the
transverse magnetization of the Gaussian post-quench state.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .integrator import IntegratorConfig, ModeAmplitudes, evolve_modes
from .model import MomentumGrid, QuenchProtocol, static_ground_state
from .regimes import TAU_KZ, RegimeLabel, ValidityWarning, dephasing_length, density_kz, kz_length

__all__ = [
    "CorrelatorSet",
    "KinkCorrelation",
    "OscillationParams",
    "GAUSSIAN_PREFACTOR",
    "quadratic_correlators",
    "kink_density",
    "kink_kink",
    "kink_correlations",
    "gaussian_kz_correlation",
    "gaussian_kz_kink_kink",
    "magnetization_params",
    "magnetization_regime",
    "magnetization_from_correlators",
    "magnetization_trace",
    "ground_state_magnetization",
    "beta_r_time",
]

GAUSSIAN_PREFACTOR = 9.75
_PHASE_FLOOR = 1e-14


@dataclass(frozen=True)
class CorrelatorSet:
    """alpha_R (real) and beta_R (complex) for R = 0..r_max at time ``t``."""

    alpha: np.ndarray
    beta: np.ndarray
    t: float

    @property
    def r_max(self) -> int:
        return len(self.alpha) - 1


@dataclass(frozen=True)
class KinkCorrelation:
    """C_R for R = 0..r_max; the split is NaN where it is not defined (R <= 1)."""

    C: np.ndarray
    nonmixed: np.ndarray
    mixed: np.ndarray


@dataclass(frozen=True)
class OscillationParams:
    """<sigma^z(t)> = A + M cos(4t + phi) during free evolution."""

    A: float
    M: float
    phi: float
    phase_defined: bool = True


def _as_single(amps):
    if isinstance(amps, ModeAmplitudes):
        return amps
    amps = list(amps)
    if not amps:
        raise ValueError("no amplitudes given")
    t0 = amps[0].t
    if any(a.t != t0 for a in amps):
        raise ValueError("amplitudes must share a common time")
    return ModeAmplitudes(
        np.array([a.q for a in amps], dtype=float),
        t0,
        np.array([a.u for a in amps], dtype=complex),
        np.array([a.v for a in amps], dtype=complex),
    )


def quadratic_correlators(amps, r_max: int = 64, n_sites: int | None = None) -> CorrelatorSet:
    """alpha_R, beta_R for R = 0..r_max from amplitudes on the positive-q grid.

    ``amps`` is a grid-valued ``ModeAmplitudes`` or a sequence of single-mode
    ones (which must share one time).  ``n_sites`` defaults to twice the
    number of modes.
    """
    a = _as_single(amps)
    if r_max < 0:
        raise ValueError("r_max must be non-negative")
    q = np.atleast_1d(np.asarray(a.q, dtype=float))
    u = np.atleast_1d(a.u)
    v = np.atleast_1d(a.v)
    n = n_sites or 2 * q.size
    r = np.arange(r_max + 1)
    phase = np.outer(r, q)
    alpha = (2 / n) * (np.cos(phase) @ (np.abs(u) ** 2))
    beta = (2 / n) * (np.sin(phase) @ (u * np.conj(v)))
    return CorrelatorSet(alpha=alpha, beta=beta, t=float(a.t))


def kink_density(cs: CorrelatorSet) -> float:
    """<K_j> = 1/2 + alpha_1 - Re beta_1."""
    if cs.r_max < 1:
        raise ValueError("kink density needs R_max >= 1")
    return float(0.5 + cs.alpha[1] - cs.beta[1].real)


def kink_kink(cs: CorrelatorSet, R: int):
    """Connected correlator C_R and its (non-mixed, mixed) parts.

    The split is only meaningful for R > 1; for R <= 1 both parts are NaN.
    """
    if R < 0 or R + 1 > cs.r_max:
        raise ValueError(f"R = {R} out of range: need 0 <= R <= R_max - 1 = {cs.r_max - 1}")
    al, rb = cs.alpha, cs.beta.real
    if R == 0:
        c = 0.25 - rb[1] ** 2 - al[1] ** 2 + 2 * al[1] * rb[1]
        return float(c), math.nan, math.nan
    if R == 1:
        c = cs.beta[1].imag ** 2 - rb[2] / 2 - al[2] * al[0] + al[0] * rb[2] + al[2] / 2
        return float(c), math.nan, math.nan
    nonmixed = rb[R + 1] * rb[R - 1] + cs.beta[R].imag ** 2 - al[R + 1] * al[R - 1]
    mixed = al[R - 1] * rb[R + 1] - al[R + 1] * rb[R - 1]
    return float(nonmixed + mixed), float(nonmixed), float(mixed)


def kink_correlations(cs: CorrelatorSet, r_max: int | None = None) -> KinkCorrelation:
    """``kink_kink`` for R = 0..r_max (default R_max - 1)."""
    r_max = cs.r_max - 1 if r_max is None else r_max
    rows = np.array([kink_kink(cs, r) for r in range(r_max + 1)])
    return KinkCorrelation(C=rows[:, 0], nonmixed=rows[:, 1], mixed=rows[:, 2])


def gaussian_kz_correlation(tau_Q, R):
    """KZ-regime prediction of n^-2 C_R with its Gaussian decay."""
    if tau_Q < TAU_KZ:
        warnings.warn("Gaussian kink-kink form assumes tau_Q >= tau_KZ", ValidityWarning, stacklevel=2)
    R = np.asarray(R, dtype=float)
    if np.any(R < 1):
        raise ValueError("R must be >= 1")
    xi = kz_length(tau_Q)
    ell = dephasing_length(tau_Q)
    out = GAUSSIAN_PREFACTOR * xi * R**2 / ell**3 * np.exp(-3 * np.pi * (R / ell) ** 2) - np.exp(
        -2 * np.pi * (R / xi) ** 2
    )
    return out[()] if out.ndim == 0 else out


def gaussian_kz_kink_kink(tau_Q, R):
    """The same prediction in absolute units, C_R = n_KZ^2 * (n^-2 C_R)."""
    return density_kz(tau_Q) ** 2 * gaussian_kz_correlation(tau_Q, R)


def magnetization_params(cs: CorrelatorSet) -> OscillationParams:
    """A, M and phi of the free-evolution oscillation from t = 0 correlators."""
    if cs.t != 0:
        raise ValueError("oscillation parameters need correlators at t = 0")
    if cs.r_max < 2:
        raise ValueError("need R_max >= 2")
    al, b = cs.alpha, cs.beta
    x = al[0] - al[2] + b[2].real - 0.5
    y = 2 * b[1].imag
    a = al[0] + al[2] - b[2].real - 0.5
    m = math.hypot(x, y)
    if m < _PHASE_FLOOR:  # rounding-level amplitude: the phase is meaningless
        return OscillationParams(float(a), 0.0, 0.0, phase_defined=False)
    return OscillationParams(float(a), float(m), math.atan2(y, x))


def magnetization_regime(g_i: float, tau_Q: float, label) -> tuple[float, float]:
    """Closed-form (A, M^2) for the S and PS regimes, as printed for large g_i."""
    label = RegimeLabel(label)
    inv2 = g_i**-2
    if label is RegimeLabel.PS:
        a = 0.5 - inv2 / 16 + (math.pi * inv2 / 64 - math.pi / 8) * tau_Q
        m2 = 0.25 - 3 * inv2 / 16 + (7 * math.pi * inv2 / 32 - math.pi / 8) * tau_Q
    elif label is RegimeLabel.S:
        a = 0.5 - 3 * inv2 / 16 - g_i**2 / 12 * tau_Q**2
        m2 = 0.25 - inv2 / 16 - g_i**2 / 4 * tau_Q**2
    else:
        raise ValueError("no closed form for A and M^2 in the KZ regime")
    return a, m2


def magnetization_from_correlators(cs: CorrelatorSet) -> float:
    """<sigma^z> = 2 alpha_0 - 1."""
    return float(2 * cs.alpha[0] - 1)


def ground_state_magnetization(g: float, grid: MomentumGrid) -> float:
    """<sigma^z> in the static ground state at field g on ``grid``."""
    q = grid.q_values
    gs = static_ground_state(g, q)
    return float(2 * np.mean(np.asarray(gs.u) ** 2) - 1)


def magnetization_trace(
    p: QuenchProtocol,
    t_grid: Sequence[float],
    grid: MomentumGrid | None = None,
    cfg: IntegratorConfig | None = None,
) -> np.ndarray:
    """<sigma^z(t)> = 2 alpha_0(t) - 1 on increasing ``t_grid``."""
    grid = grid or MomentumGrid()
    t_grid = np.asarray(t_grid, dtype=float)
    states = evolve_modes(p, grid.q_values, cfg, times=t_grid)
    return np.array([2 * np.mean(np.abs(s.u) ** 2) - 1 for s in states])


def beta_r_time(amps: ModeAmplitudes, R: int, n_sites: int | None = None) -> complex:
    """beta_R at the time of ``amps``."""
    if R < 0:
        raise ValueError("R must be non-negative")
    cs = quadratic_correlators(amps, r_max=R, n_sites=n_sites)
    return complex(cs.beta[R])
