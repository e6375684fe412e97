"""Fits and scaling collapses of sweep data.

Power laws in log-log coordinates, the turning-point scaling with g_i, the
collapse of kink-kink correlations onto xi^-Delta S(R/xi) with
S(x) = K x exp(-x), and the activated form of C_1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .integrator import IntegratorConfig, spectrum
from .model import MomentumGrid, QuenchProtocol
from .regimes import turning_points

__all__ = [
    "FitResult",
    "CollapseResult",
    "CollapseWarning",
    "fit_power_law",
    "fit_line",
    "fit_turning_scaling",
    "fit_turning_density",
    "collapse_kkc",
    "fit_c1kk",
    "extremum_period",
]


class CollapseWarning(UserWarning):
    """The collapse misfit exceeds the requested threshold."""


@dataclass(frozen=True)
class FitResult:
    """Fitted amplitude, exponent and optional offset.

    ``residual`` is the root-mean-square relative misfit over ``n_samples``
    points.
    """

    amplitude: float
    exponent: float
    offset: float | None
    residual: float
    n_samples: int


@dataclass(frozen=True)
class CollapseResult:
    delta: float
    xi_by_tau: dict
    shape_amplitude: float
    quality: float
    xi_offset: float
    xi_slope: float
    window: tuple
    quality_scan: np.ndarray = field(repr=False)  # rows of (delta, misfit)


def _positive(name, a):
    a = np.asarray(a, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a <= 0):
        raise ValueError(f"{name} must be finite and positive")
    return a


def fit_power_law(x, y) -> FitResult:
    """Least-squares y = c x^e in log-log coordinates."""
    x = _positive("x", x)
    y = _positive("y", y)
    if x.size != y.size:
        raise ValueError("x and y differ in length")
    if x.size < 4:
        raise ValueError("a power-law fit needs at least 4 points")
    e, logc = np.polyfit(np.log(x), np.log(y), 1)
    c = math.exp(logc)
    rel = c * x**e / y - 1
    return FitResult(c, float(e), None, float(np.sqrt(np.mean(rel**2))), x.size)


def fit_line(x, y) -> tuple[float, float]:
    """(offset, slope) of an ordinary least-squares line."""
    slope, offset = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(offset), float(slope)


def fit_turning_scaling(g_values: Sequence[float]) -> FitResult:
    """Power-law fit tau_S = c g_i^e over the S/PS crossings."""
    g = np.asarray(g_values, dtype=float)
    if np.any(g < 8):
        raise ValueError("turning-point scaling is fitted for g_i >= 8")
    tau_s = [turning_points(gi).tau_S for gi in g]
    return fit_power_law(g, tau_s)


def fit_turning_density(
    g_values: Sequence[float],
    grid: MomentumGrid | None = None,
    cfg: IntegratorConfig | None = None,
) -> FitResult:
    """Fit the numerical density at tau_S to n = 1/2 - b / g_i.

    Returns ``amplitude = b``, ``exponent = -1`` and ``offset = 1/2``.
    """
    grid = grid or MomentumGrid()
    g = np.asarray(g_values, dtype=float)
    dens = np.array([spectrum(QuenchProtocol(gi, turning_points(gi).tau_S), grid, cfg).density for gi in g])
    inv = 1 / g
    deficit = 0.5 - dens
    b = float(np.dot(deficit, inv) / np.dot(inv, inv))
    rel = (0.5 - b * inv) / dens - 1
    return FitResult(b, -1.0, 0.5, float(np.sqrt(np.mean(rel**2))), g.size)


def _collapse_points(table, taus, xi, window, r_max):
    pts = []
    for k, tau in enumerate(taus):
        c = np.asarray(table[tau], dtype=float)
        for r in range(1, min(r_max, len(c) - 1) + 1):
            ratio = c[r] / c[1]
            if ratio > 0 and window[0] <= r / xi[k] <= window[1]:
                pts.append((k, r, math.log(ratio)))
    if not pts:
        raise ValueError("no correlation data fall inside the collapse window")
    return np.array([p[0] for p in pts], dtype=int), np.array([p[1] for p in pts], float), np.array([p[2] for p in pts])


def _shape_residual(delta, log_k, xi, idx, r, y):
    x = xi[idx]
    return log_k - delta * np.log(x) + np.log(r / x) - r / x - y


def _fit_xi(delta, log_k, xi0, pts):
    idx, r, y = pts

    def res(p):
        return _shape_residual(delta, p[0], np.exp(p[1:]), idx, r, y)

    sol = least_squares(res, np.r_[log_k, np.log(xi0)], x_scale="jac")
    xi = np.exp(sol.x[1:])
    return sol.x[0], xi


def _misfit(delta, xi, pts):
    """RMS log-residual with the shape amplitude profiled out."""
    idx, r, y = pts
    res = _shape_residual(delta, 0.0, xi, idx, r, y)
    log_k = -res.mean()
    return float(np.sqrt(np.mean((res + log_k) ** 2))), float(log_k)


def collapse_kkc(
    kkc_by_tau: Mapping[float, Sequence[float]],
    window: tuple[float, float] = (0.3, 5.0),
    delta_range: tuple[float, float] = (0.5, 1.5),
    delta_step: float = 0.01,
    r_max: int = 64,
    quality_threshold: float = 0.1,
) -> CollapseResult:
    """Collapse C_R / C_1 = xi^-Delta K (R/xi) exp(-R/xi) over quench times.

    ``kkc_by_tau`` maps tau_Q to C_R for R = 0, 1, ....  Points enter the
    log-residual misfit when C_R/C_1 > 0 and R/xi lies in ``window``.  The
    correlation lengths (with K) are fitted first at Delta = 1; Delta is
    then scanned over ``delta_range`` with the lengths held fixed and
    refined by a golden-section search; the lengths are refitted at that
    Delta and the scan repeated once.
    """
    taus = sorted(float(t) for t in kkc_by_tau)
    if len(taus) < 2:
        raise ValueError("need C_R tables for at least two quench times")
    table = {float(t): v for t, v in kkc_by_tau.items()}
    for t in taus:
        if len(table[t]) < 3 or table[t][1] == 0:
            raise ValueError(f"C_R table at tau_Q = {t} is too short or has C_1 = 0")
    xi = 0.33 + 0.23 * np.asarray(taus)  # starting guess only
    log_k = math.log(1.86)
    delta = 1.0
    grid = np.arange(delta_range[0], delta_range[1] + delta_step / 2, delta_step)
    for _ in range(2):
        pts = _collapse_points(table, taus, xi, window, r_max)
        log_k, xi = _fit_xi(delta, log_k, xi, pts)
        pts = _collapse_points(table, taus, xi, window, r_max)
        scan = np.array([_misfit(d, xi, pts)[0] for d in grid])
        i = int(np.argmin(scan))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        if hi > lo:
            best = minimize_scalar(lambda d: _misfit(d, xi, pts)[0], bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-6})
            delta = float(best.x) if best.fun <= scan[i] else float(grid[i])
        else:
            delta = float(grid[i])
        quality, log_k = _misfit(delta, xi, pts)
    if quality > quality_threshold:
        warnings.warn(f"poor collapse: misfit {quality:.3g} exceeds {quality_threshold}", CollapseWarning,
                      stacklevel=2)
    offset, slope = fit_line(taus, xi)
    return CollapseResult(
        delta=delta,
        xi_by_tau=dict(zip(taus, map(float, xi))),
        shape_amplitude=math.exp(log_k),
        quality=quality,
        xi_offset=offset,
        xi_slope=slope,
        window=tuple(window),
        quality_scan=np.column_stack([grid, scan]),
    )


def fit_c1kk(tau_values, c1_values) -> FitResult:
    """Fit C_1 = -c exp(-b / tau_Q).

    Returns ``amplitude = c`` and ``exponent = b`` (the activation
    constant).
    """
    tau = _positive("tau_Q", tau_values)
    c1 = np.asarray(c1_values, dtype=float)
    if tau.size != c1.size or tau.size < 2:
        raise ValueError("need matching tau_Q and C_1 samples (at least two)")
    if not np.all(c1 < 0):
        raise ValueError("C_1 samples must all be negative")
    slope, intercept = np.polyfit(1 / tau, np.log(-c1), 1)
    c, b = math.exp(intercept), -slope
    rel = -c * np.exp(-b / tau) / c1 - 1
    return FitResult(c, float(b), None, float(np.sqrt(np.mean(rel**2))), tau.size)


def extremum_period(x, y, skip: int = 1) -> float:
    """Oscillation period from successive extrema of samples y(x).

    Extrema are located on the sampled grid and refined by a parabola
    through the neighbours; the period is twice the mean spacing of the
    extrema after the first ``skip`` ones.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dy = np.diff(y)
    k = np.flatnonzero(np.sign(dy[1:]) != np.sign(dy[:-1])) + 1
    ext = []
    for i in k:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        den = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        ext.append(float(np.interp(i + shift, np.arange(x.size), x)))
    ext = np.sort(np.asarray(ext))[skip:]
    if ext.size < 2:
        raise ValueError("fewer than two extrema to measure a period")
    return float(2 * np.mean(np.diff(ext)))
