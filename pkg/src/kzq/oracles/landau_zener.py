"""Exact solution of a single ramped mode through parabolic cylinder functions.

With z = 2 sqrt(tau_Q) (t / tau_Q + cos q) exp(i pi/4) and m = i tau_Q sin^2 q - 1,

    v(z) = C1 D_m(iz) + C2 D_m(-iz)
    u(z) = k [C1 D_{m+1}(iz) - C2 D_{m+1}(-iz)],   k = exp(i pi/4) / (sqrt(tau_Q) sin q),

where the u-line follows from u = k (i d/dz + iz/2) v and the recurrence
D_m'(w) = (w/2) D_m(w) - D_{m+1}(w).  The constants are fixed by matching the
static ground state at z_i.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ..integrator import ModeAmplitudes
from ..model import QuenchProtocol, static_ground_state
from .pcf import PcfAccuracyError, PcfOrder, pcf_d

__all__ = [
    "LZConstants",
    "z_of",
    "lz_constants",
    "asymptotic_constants",
    "exact_amplitudes",
    "exact_probability",
]

_ROT = cmath.exp(1j * math.pi / 4)


@dataclass(frozen=True)
class LZConstants:
    C1: complex
    C2: complex
    regime: str  # "large" (|z_i| >> 1), "small" (|z_i| << 1) or "intermediate"
    condition: float = float("nan")


def z_of(t, q, tau_Q):
    """Argument z(t) of the parabolic cylinder functions for mode q."""
    return 2 * math.sqrt(tau_Q) * (t / tau_Q + math.cos(q)) * _ROT


def _regime(z_i):
    a = abs(z_i)
    if a >= 10:
        return "large"
    if a <= 0.1:
        return "small"
    return "intermediate"


def _basis(p: QuenchProtocol, q, t):
    """Rows (v, u) of the fundamental solutions at time t."""
    m = PcfOrder.for_mode(p.tau_Q, q).m
    z = z_of(t, q, p.tau_Q)
    k = _ROT / (math.sqrt(p.tau_Q) * math.sin(q))
    iz = 1j * z
    v_row = (pcf_d(m, iz), pcf_d(m, -iz))
    u_row = (k * pcf_d(m + 1, iz), -k * pcf_d(m + 1, -iz))
    return v_row, u_row


def lz_constants(p: QuenchProtocol, q: float) -> LZConstants:
    """Constants C1, C2 reproducing the static ground state at t_i.

    The 2x2 match is always solved numerically; ``regime`` records which
    closed-form limit (``asymptotic_constants``) it should approach.
    """
    if p.tau_Q <= 0:
        raise ValueError("the parabolic-cylinder solution needs tau_Q > 0")
    if not 0 < q < math.pi:
        raise ValueError("q must lie in (0, pi)")
    gs = static_ground_state(p.g_i, q)
    v_row, u_row = _basis(p, q, p.t_i)
    mat = np.array([v_row, u_row], dtype=complex)
    rhs = np.array([gs.v, gs.u], dtype=complex)
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > 1e13:
        raise PcfAccuracyError(f"ill-conditioned boundary match (cond={cond:.3g}) at q={q}")
    c1, c2 = np.linalg.solve(mat, rhs)
    return LZConstants(complex(c1), complex(c2), _regime(z_of(p.t_i, q, p.tau_Q)), float(cond))


def asymptotic_constants(p: QuenchProtocol, q: float):
    """Closed-form limits of the constants.

    For |z_i| >> 1 returns (|C1|^2, |C2|^2); for |z_i| << 1 returns the
    complex (C1, C2) to first order in sqrt(tau_Q).
    """
    gs = static_ground_state(p.g_i, q)
    s = math.sin(q)
    z_i = z_of(p.t_i, q, p.tau_Q)
    if _regime(z_i) == "small":
        shared = gs.v / math.sqrt(2 * math.pi)
        odd = cmath.exp(3j * math.pi / 4) * gs.u * math.sqrt(p.tau_Q) * s / 2
        return shared - odd, shared + odd
    x = p.tau_Q * s * s
    return gs.u**2 * math.exp(-math.pi / 2 * x) * x, 0.0


def exact_amplitudes(p: QuenchProtocol, q: float, t: float = 0.0, constants: LZConstants | None = None):
    """(u, v) of mode q at time t in [t_i, 0] from the exact solution."""
    if not p.t_i <= t <= 0:
        raise ValueError(f"t must lie in [t_i, 0] = [{p.t_i}, 0]")
    if p.tau_Q == 0:
        gs = static_ground_state(p.g_i, q)
        return ModeAmplitudes(q, t, complex(gs.u), complex(gs.v))
    c = constants or lz_constants(p, q)
    v_row, u_row = _basis(p, q, t)
    v = c.C1 * v_row[0] + c.C2 * v_row[1]
    u = c.C1 * u_row[0] + c.C2 * u_row[1]
    norm = abs(u) ** 2 + abs(v) ** 2
    if abs(norm - 1) > 1e-7:
        raise PcfAccuracyError(f"exact solution lost unitarity: |u|^2+|v|^2-1 = {norm - 1:.3g}")
    return ModeAmplitudes(q, float(t), complex(u), complex(v))


def exact_probability(p: QuenchProtocol, q: float) -> float:
    """Excitation probability at t = 0 from the exact solution."""
    m = exact_amplitudes(p, q, 0.0)
    return abs(math.cos(q / 2) * m.u - math.sin(q / 2) * m.v) ** 2
