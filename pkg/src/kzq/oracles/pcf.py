"""Parabolic cylinder function D_m(z) for complex order and argument.

Three evaluation routes are stitched together:

* Maclaurin series (two Kummer functions) for small |z|;
* the large-|z| asymptotic series, with the Stokes term switched on for
  |arg z| > pi/2, once it converges to machine precision;
* numerical continuation of Weber's equation w'' = (z^2/4 - m - 1/2) w
  along the ray through z in between.

Continuation runs inward from the asymptotic region when D_m is recessive or
oscillatory along the ray (|arg z| <= pi/4) and outward from the series
otherwise, so that it always follows the solution that does not decay
relative to its companion.  Powers use the principal branch,
z^m = exp(m Log z) with arg z in (-pi, pi].
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import loggamma, rgamma

__all__ = ["PcfOrder", "PcfAccuracyError", "pcf_d", "pcf_series", "pcf_asymptotic"]

_EPS = 2.2e-16
_SERIES_RADIUS = 4.0
_MAX_LOSS = 1e-9  # tolerated relative rounding loss in the series


class PcfAccuracyError(ArithmeticError):
    """Raised when no evaluation route reaches the requested accuracy."""


@dataclass(frozen=True)
class PcfOrder:
    """Complex order m of D_m; for the Landau-Zener mode m = i tau sin^2 q - 1."""

    m: complex

    @classmethod
    def for_mode(cls, tau_Q: float, q: float) -> "PcfOrder":
        s_q = -1j * tau_Q * math.sin(q) ** 2
        return cls(-s_q - 1)

    def __post_init__(self):
        if abs(complex(self.m).imag) > 1e4:
            raise ValueError("|Im m| > 1e4 is outside the supported range")


def _kummer(a, b, x, max_terms=2000):
    """Return (M(a, b, x), largest term magnitude) by direct summation."""
    term = 1.0 + 0j
    total = term
    biggest = 1.0
    for k in range(max_terms):
        term *= (a + k) / (b + k) * x / (k + 1)
        total += term
        at = abs(term)
        biggest = max(biggest, at)
        if at <= 1e-17 * abs(total) and k > abs(a):
            return total, biggest
        if term == 0:
            return total, biggest
    raise PcfAccuracyError("Kummer series did not converge")


def pcf_series(m, z):
    """D_m(z) from the Maclaurin (Kummer) representation.

    Returns ``(value, loss)`` where ``loss`` estimates the relative error
    caused by cancellation.
    """
    m = complex(m)
    z = complex(z)
    x = z * z / 2
    c1 = math.sqrt(math.pi) * rgamma((1 - m) / 2)
    c2 = math.sqrt(2 * math.pi) * rgamma(-m / 2)
    m1, big1 = _kummer(-m / 2, 0.5, x)
    m2, big2 = _kummer((1 - m) / 2, 1.5, x)
    f = c1 * m1 - c2 * z * m2
    scale = abs(c1) * big1 + abs(c2 * z) * big2
    pref = cmath.exp(m / 2 * math.log(2) - z * z / 4)
    if f == 0:
        return 0j, (math.inf if scale else 0.0)
    return pref * f, _EPS * scale / abs(f)


def _asym_sum(ratio, z2, max_terms=400):
    """Sum an asymptotic series whose term ratio is ``ratio(s)/z2``.

    Returns the sum if the terms fall below machine precision before they
    start to grow, otherwise None.
    """
    total = 1.0 + 0j
    term = 1.0 + 0j
    prev = math.inf
    for s in range(max_terms):
        term *= ratio(s) / z2
        at = abs(term)
        if at <= 1e-17 * abs(total):
            return total
        if at > prev:
            return None
        total += term
        prev = at
    return None


def pcf_asymptotic(m, z):
    """D_m(z) from the large-|z| expansion, or None if it has not converged."""
    m = complex(m)
    z = complex(z)
    z2 = 2 * z * z
    s1 = _asym_sum(lambda s: -(-m + 2 * s) * (-m + 2 * s + 1) / (s + 1), z2)
    if s1 is None:
        return None
    logz = cmath.log(z)
    value = cmath.exp(-z * z / 4 + m * logz) * s1
    ph = cmath.phase(z)
    if abs(ph) > math.pi / 2:
        if m.imag == 0 and m.real >= 0 and m.real == int(m.real):
            return value  # 1/Gamma(-m) = 0
        s2 = _asym_sum(lambda s: (m + 1 + 2 * s) * (m + 2 + 2 * s) / (s + 1), z2)
        if s2 is None:
            return None
        sign = 1 if ph > 0 else -1
        log2 = (
            0.5 * math.log(2 * math.pi)
            - loggamma(-m)
            + sign * 1j * math.pi * m
            + z * z / 4
            - (m + 1) * logz
        )
        value -= cmath.exp(log2) * s2
    return value


def _weber_path(m, z0, w0, dw0, z1):
    """Integrate Weber's equation on the straight segment z0 -> z1."""
    dz = z1 - z0
    shift = m + 0.5

    def rhs(s, y):
        zz = z0 + s * dz
        return [dz * y[1], dz * (zz * zz / 4 - shift) * y[0]]

    scale = max(abs(w0), abs(dw0))
    sol = solve_ivp(
        rhs,
        (0.0, 1.0),
        np.array([w0, dw0], dtype=complex),
        method="DOP853",
        rtol=1e-13,
        atol=1e-16 * scale,
    )
    if not sol.success:
        raise PcfAccuracyError(f"continuation failed: {sol.message}")
    return sol.y[0, -1], sol.y[1, -1]


def _asymptotic_radius(m, direction):
    r = max(12.0, 3.0 * math.sqrt(abs(m) + 1.0))
    while r <= 2e3:
        zz = r * direction
        d0 = pcf_asymptotic(m, zz)
        d1 = pcf_asymptotic(m + 1, zz)
        if d0 is not None and d1 is not None:
            return zz, d0, d1
        r *= 1.5
    raise PcfAccuracyError(f"asymptotic expansion does not converge for m={m}")


def _series_start(m, direction, r):
    while r >= 1 / 64:
        zz = r * direction
        d0, l0 = pcf_series(m, zz)
        d1, l1 = pcf_series(m + 1, zz)
        if max(l0, l1) < _MAX_LOSS:
            return zz, d0, d1
        r /= 2
    raise PcfAccuracyError(f"series loses accuracy for m={m}")


def _pair(m, z):
    """(D_m(z), D'_m(z)) via continuation; used off the series and asymptotic zones."""
    direction = z / abs(z)
    if abs(cmath.phase(z)) <= math.pi / 4 + 1e-9:
        z0, d0, d1 = _asymptotic_radius(m, direction)
    else:
        z0, d0, d1 = _series_start(m, direction, min(_SERIES_RADIUS, abs(z)))
    dd0 = z0 / 2 * d0 - d1
    return _weber_path(m, z0, d0, dd0, z)


def pcf_d(m, z) -> complex:
    """Parabolic cylinder function D_m(z) (Whittaker's notation).

    Accurate to about 1e-10 relative for |z| <= 1e3 and moderate |m|;
    raises ``PcfAccuracyError`` when every route loses accuracy.
    """
    m = complex(m.m if isinstance(m, PcfOrder) else m)
    z = complex(z)
    if abs(z) > 1e3:
        raise PcfAccuracyError("|z| > 1e3 is outside the supported domain")
    if abs(z) <= _SERIES_RADIUS:
        value, loss = pcf_series(m, z)
        if loss < _MAX_LOSS:
            return value
    try:
        value = pcf_asymptotic(m, z)
    except OverflowError:
        raise PcfAccuracyError(f"D_m(z) overflows at m={m}, z={z}") from None
    if value is not None:
        return value
    if z == 0:
        raise PcfAccuracyError(f"series loses accuracy at z = 0 for m={m}")
    return complex(_pair(m, z)[0])
