"""Transverse-field Ising chain under a linear ramp: protocol, momentum grid,
dispersion and the static Bogoliubov ground state.

Units are J = 1 throughout.  The Hamiltonian is

    H = -sum_j (sx_j sx_{j+1} + g sz_j),

and after Jordan-Wigner each momentum pair (q, -q) with q > 0 is described by
a two-component Bogoliubov amplitude (u_q, v_q) evolving under the 2x2 matrix

    [[eps_q, Delta_q], [Delta_q, -eps_q]],  eps_q = 2 (g - cos q),  Delta_q = 2 sin q.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuenchProtocol",
    "MomentumGrid",
    "StaticBogoliubov",
    "dispersion",
    "ramp_value",
    "static_ground_state",
    "bogoliubov_angle",
]


@dataclass(frozen=True)
class QuenchProtocol:
    """Linear ramp g(t) = -t / tau_Q from g_i at t_i = -g_i tau_Q down to 0 at t = 0.

    With ``hold=True`` the field stays at zero for t > 0 (free evolution).
    """

    g_i: float
    tau_Q: float
    hold: bool = False

    def __post_init__(self):
        if not self.g_i > 0:
            raise ValueError(f"g_i must be positive, got {self.g_i}")
        if not self.tau_Q >= 0:
            raise ValueError(f"tau_Q must be non-negative, got {self.tau_Q}")

    @property
    def t_i(self) -> float:
        return -self.g_i * self.tau_Q

    @property
    def t_f(self) -> float:
        return 0.0

    @property
    def t_c(self) -> float:
        """Time at which the ramp crosses the critical field g = 1."""
        return -self.tau_Q


@dataclass(frozen=True)
class MomentumGrid:
    """Positive momenta q_k = pi (2k - 1) / N, k = 1..N/2, of an N-site ring.

    These are the antiperiodic (even fermion parity) momenta; each q stands
    for the pair (q, -q).
    """

    n_sites: int = 4096
    q_values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n_sites
        if n <= 0 or n % 2:
            raise ValueError(f"n_sites must be a positive even integer, got {n}")
        k = np.arange(1, n // 2 + 1)
        q = np.pi * (2 * k - 1) / n
        q.setflags(write=False)
        object.__setattr__(self, "q_values", q)

    @property
    def n_modes(self) -> int:
        return self.n_sites // 2

    @property
    def dq(self) -> float:
        return 2 * np.pi / self.n_sites

    def __len__(self):
        return self.n_modes


@dataclass(frozen=True)
class StaticBogoliubov:
    u: float
    v: float


def _check_q(q, closed=True):
    q = np.asarray(q, dtype=float)
    if closed:
        bad = (q < 0) | (q > np.pi)
    else:
        bad = (q <= 0) | (q >= np.pi)
    if np.any(bad):
        rng = "[0, pi]" if closed else "(0, pi)"
        raise ValueError(f"momentum outside {rng}: {q[bad].ravel()[:3]}")
    return q


def dispersion(g, q):
    """Quasiparticle energy omega_q = 2 sqrt(1 + g^2 - 2 g cos q)."""
    q = _check_q(q)
    if np.any(np.asarray(g) < 0):
        raise ValueError("field must be non-negative")
    # (g - cos q)^2 + sin^2 q avoids the cancellation in 1 + g^2 - 2g cos q near g = 1, q = 0
    return 2.0 * np.hypot(g - np.cos(q), np.sin(q))


def ramp_value(p: QuenchProtocol, t):
    """Transverse field g(t) along the protocol."""
    t = np.asarray(t, dtype=float)
    if np.any(t < p.t_i):
        raise ValueError(f"t < t_i = {p.t_i}")
    if np.any(t > 0) and not p.hold:
        raise ValueError("t > 0 requires a protocol with hold=True")
    if p.tau_Q == 0:
        # sudden quench: t_i = t_f = 0 and the state prepared at g_i sees g = 0
        g = np.zeros_like(t)
    else:
        g = np.where(t <= 0, -t / p.tau_Q, 0.0)
    return g[()] if g.ndim == 0 else g


def bogoliubov_angle(g, q):
    """Angle theta in (0, pi) with tan theta = sin q / (g - cos q).

    The ground state pair is (u, v) = (cos(theta/2), sin(theta/2)).
    """
    return np.arctan2(np.sin(q), g - np.cos(q))


def static_ground_state(g, q):
    """Ground-state Bogoliubov pair at fixed field.

    This is the positive-energy eigenvector of the 2x2 BdG matrix, fixed so
    that u >= 0.  ``g = np.inf`` gives the fully polarized (1, 0).
    Array inputs return a ``StaticBogoliubov`` holding arrays.
    """
    q = _check_q(q, closed=False)
    if np.any(np.asarray(g) < 0):
        raise ValueError("field must be non-negative")
    if np.all(np.isinf(g)):
        th = np.zeros_like(q)
    else:
        th = bogoliubov_angle(g, q)
    u, v = np.cos(th / 2), np.sin(th / 2)
    if np.ndim(u) == 0:
        return StaticBogoliubov(float(u), float(v))
    return StaticBogoliubov(u, v)
