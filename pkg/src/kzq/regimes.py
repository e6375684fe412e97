"""Closed-form quench formulas for the three regimes.

KZ (tau_Q > 1), PS (g_i^-2 < tau_Q < 1) and S (tau_Q < g_i^-2): densities,
excitation spectra, the KZ dynamical phase and dephasing length, the two
turning points and the adiabatic-impulse estimates of where they sit.
Formulas that are only valid inside their regime emit ``ValidityWarning``
instead of failing.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .model import static_ground_state

EULER_GAMMA = 0.57721566490153286061
TAU_KZ = math.exp(2 - EULER_GAMMA) / 4

__all__ = [
    "EULER_GAMMA",
    "TAU_KZ",
    "ValidityWarning",
    "RegimeLabel",
    "TurningPoints",
    "KzLengths",
    "classify",
    "density_kz",
    "density_s",
    "density_su",
    "density_ps",
    "ps_coefficients",
    "spectrum_closed_form",
    "dynamical_phase",
    "kz_length",
    "dephasing_length",
    "kz_lengths",
    "turning_points",
    "ai_estimates",
    "kz_bogoliubov",
]


class ValidityWarning(UserWarning):
    """A closed form was evaluated outside the regime where it holds."""


class RegimeLabel(str, enum.Enum):
    KZ = "KZ"
    PS = "PS"
    S = "S"


@dataclass(frozen=True)
class TurningPoints:
    tau_S: float
    tau_KZ: float


@dataclass(frozen=True)
class KzLengths:
    xi_KZ: float
    l: float


def _warn(msg):
    warnings.warn(msg, ValidityWarning, stacklevel=3)


def classify(g_i: float, tau_Q: float) -> RegimeLabel:
    """Regime of a protocol; a value on a boundary goes to the slower regime."""
    if g_i <= 0 or tau_Q < 0:
        raise ValueError("need g_i > 0 and tau_Q >= 0")
    if tau_Q >= 1:
        return RegimeLabel.KZ
    if tau_Q >= g_i**-2:
        return RegimeLabel.PS
    return RegimeLabel.S


def density_kz(tau_Q):
    """n = 1 / (2 pi sqrt(2 tau_Q))."""
    tau_Q = np.asarray(tau_Q, dtype=float)
    if np.any(tau_Q <= 0):
        raise ValueError("tau_Q must be positive")
    out = 1 / (2 * np.pi * np.sqrt(2 * tau_Q))
    return out[()] if out.ndim == 0 else out


def density_su(g_i):
    """Sudden-quench plateau 1/2 - 1/(4 g_i) (large g_i)."""
    return 0.5 - 0.25 / g_i


def density_s(g_i, tau_Q):
    """Saturated-regime density n_su - g_i^3 tau_Q^2 / 6."""
    if g_i < 4:
        _warn(f"S-regime density assumes g_i >> 1 (g_i = {g_i})")
    tau_Q = np.asarray(tau_Q, dtype=float)
    out = density_su(g_i) - g_i**3 * tau_Q**2 / 6
    return out[()] if out.ndim == 0 else out


def ps_coefficients(g_i):
    """(A, B) of n = 1/2 - A sqrt(tau_Q) + B tau_Q^{3/2}; g_i = inf gives the limits."""
    inv2 = 0.0 if math.isinf(g_i) else g_i**-2
    rp = math.sqrt(math.pi)
    a = (1 - 3 * inv2 / 16) * rp / 4
    b = rp * inv2 / 32 - 5 * math.pi**1.5 * inv2 / 256 - rp / 4 + 3 * math.pi**1.5 / 32
    return a, b


def density_ps(g_i, tau_Q, warn=True):
    """Pre-saturated density 1/2 - A(g_i) sqrt(tau_Q) + B(g_i) tau_Q^{3/2}."""
    tau_Q = np.asarray(tau_Q, dtype=float)
    if warn and np.any((tau_Q <= g_i**-2) | (tau_Q >= 1)):
        _warn("PS-regime density used outside g_i^-2 < tau_Q < 1")
    a, b = ps_coefficients(g_i)
    out = 0.5 - a * np.sqrt(tau_Q) + b * tau_Q**1.5
    return out[()] if out.ndim == 0 else out


def _u2_initial(g_i, q):
    if math.isinf(g_i):
        return np.ones_like(np.asarray(q, dtype=float))
    return np.asarray(static_ground_state(g_i, q).u) ** 2


def spectrum_closed_form(regime, g_i, tau_Q, q):
    """Closed-form p_q for a regime; returns ``(p, clamped)``.

    KZ: exp(-2 pi tau_Q q^2).  PS: lowest order in sqrt(tau_Q).  S: the
    sudden-quench spectrum with the exact static state at g_i (the
    O(tau_Q^2) spectral correction is only known to leading order in g_i and
    is left to the density-level ``density_s``).  ``clamped`` flags values
    pushed back into [0, 1].
    """
    regime = RegimeLabel(regime)
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= np.pi)):
        raise ValueError("q must lie in (0, pi)")
    if regime is RegimeLabel.KZ:
        p = np.exp(-2 * np.pi * tau_Q * q**2)
    elif regime is RegimeLabel.PS:
        u2 = _u2_initial(g_i, q)
        p = 0.5 - 0.5 * np.cos(q) + u2 * np.cos(q) - 0.5 * np.sqrt(np.pi * tau_Q) * u2 * np.sin(q) ** 2
    else:
        if math.isinf(g_i):
            p = np.cos(q / 2) ** 2
        else:
            gs = static_ground_state(g_i, q)
            p = (np.asarray(gs.u) * np.cos(q / 2) - np.asarray(gs.v) * np.sin(q / 2)) ** 2
    clipped = np.clip(p, 0.0, 1.0)
    clamped = bool(np.any(clipped != p))
    if clipped.ndim == 0:
        clipped = float(clipped)
    return clipped, clamped


def dynamical_phase(tau_Q, q):
    """phi_q = pi/4 + 2 tau_Q + q^2 tau_Q (ln 4 tau_Q + gamma_E - 2)."""
    if np.any(np.asarray(tau_Q) <= 0):
        raise ValueError("tau_Q must be positive")
    return np.pi / 4 + 2 * tau_Q + q**2 * tau_Q * (np.log(4 * tau_Q) + EULER_GAMMA - 2)


def kz_length(tau_Q):
    return np.sqrt(tau_Q)


def dephasing_length(tau_Q):
    """l = sqrt(tau_Q) sqrt(1 + [3/(4 pi) (ln 4 tau_Q + gamma_E - 2)]^2)."""
    if np.any(np.asarray(tau_Q) <= 0):
        raise ValueError("tau_Q must be positive")
    bracket = 3 / (4 * np.pi) * (np.log(4 * tau_Q) + EULER_GAMMA - 2)
    return np.sqrt(tau_Q) * np.sqrt(1 + bracket**2)


def kz_lengths(tau_Q) -> KzLengths:
    return KzLengths(float(kz_length(tau_Q)), float(dephasing_length(tau_Q)))


def turning_points(g_i: float) -> TurningPoints:
    """S<->PS turning point from where the S and PS density curves meet.

    The curves cross twice; the gap n_S - n_PS is negative at both ends of
    the bracket [1e-6, 10] g_i^-2 and positive in between.  The turning point
    is the upper crossing, located by maximizing the gap and then bracketing
    the root above the maximum.
    """
    if g_i <= 2:
        raise ValueError(f"no S/PS intersection: the PS regime needs g_i > 2 (got {g_i})")
    scale = g_i**-2
    lo, hi = 1e-6 * scale, 10 * scale

    def gap(tau):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            return density_s(g_i, tau) - density_ps(g_i, tau, warn=False)

    best = minimize_scalar(lambda x: -gap(x * scale), bounds=(1e-6, 10), method="bounded",
                           options={"xatol": 1e-10})
    peak = best.x * scale
    if gap(peak) <= 0 or gap(hi) >= 0:
        raise ValueError(f"S and PS density curves do not intersect for g_i = {g_i}")
    tau_s = brentq(gap, peak, hi, xtol=1e-14 * scale, rtol=1e-12)
    return TurningPoints(tau_S=tau_s, tau_KZ=TAU_KZ)


def ai_estimates(g_i, g_f=0.0, g_c=1.0, z_nu=1.0):
    """Adiabatic-impulse scales (tau_KZ, tau_S) with unit prefactors."""
    if g_f == g_c or g_i == g_c:
        raise ValueError("degenerate estimate: an endpoint sits on the critical field")
    if abs(g_i - g_c) <= abs(g_f - g_c):
        _warn("adiabatic-impulse picture assumes |g_i - g_c| >> |g_f - g_c|")
    return abs(g_f - g_c) ** (-1 - z_nu), abs(g_i - g_c) ** (-1 - z_nu)


def kz_bogoliubov(tau_Q, q):
    """Long-wave KZ amplitudes at t = 0: (|u|^2, u v^*)."""
    if tau_Q < 1 or np.any(np.asarray(q) > np.pi / 4):
        _warn("KZ Bogoliubov amplitudes assume tau_Q >= 1 and q << pi/2")
    u2 = np.exp(-2 * np.pi * tau_Q * q**2)
    uv = np.exp(-np.pi * tau_Q * q**2) * np.sqrt(1 - u2) * np.exp(1j * dynamical_phase(tau_Q, q))
    return u2, uv
