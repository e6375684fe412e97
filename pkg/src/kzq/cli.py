"""Command-line front end for sweeps and cross-checks.

    kzq density   --gi 8 --tau 1e-4:100:60 --log
    kzq spectrum  --gi 8 --tau 10
    kzq correlate --gi 8 --tau 0.2:0.9:8 --collapse
    kzq oscillate --gi 32 --tau 1e-5:1e-1:40 --log
    kzq regimes   --gi 8 --tau 1e-4:100:20 --log
    kzq verify

Output is CSV (a ``#`` header block followed by one or more tables) or a
single JSON document.  Exit codes: 0 success, 1 usage error, 2 numerical
failure.  ``KZQ_THREADS`` sets the number of worker threads used across
sweep points; results do not depend on it.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .integrator import IntegrationError, IntegratorConfig, evolve_mode, evolve_modes, excitation_probability
from .model import MomentumGrid, QuenchProtocol
from .observables import (
    kink_correlations,
    kink_density,
    magnetization_params,
    quadratic_correlators,
)
from .oracles.pcf import PcfAccuracyError
from .regimes import (
    RegimeLabel,
    ValidityWarning,
    ai_estimates,
    classify,
    density_kz,
    density_ps,
    density_s,
    spectrum_closed_form,
    turning_points,
)
from .scaling import collapse_kkc, fit_c1kk

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class SweepSpec:
    g_i: float
    tau_range: tuple  # (min, max, points, log)
    grid_N: int
    integrator: IntegratorConfig
    output: str

    @property
    def taus(self) -> np.ndarray:
        lo, hi, n, log = self.tau_range
        if n == 1:
            return np.array([lo])
        return np.geomspace(lo, hi, n) if log else np.linspace(lo, hi, n)

    def echo(self) -> dict:
        lo, hi, n, log = self.tau_range
        return {
            "g_i": self.g_i,
            "tau_min": lo,
            "tau_max": hi,
            "tau_points": n,
            "tau_log": log,
            "grid_N": self.grid_N,
            "rel_tol": self.integrator.rel_tol,
            "abs_tol": self.integrator.abs_tol,
        }


@dataclass
class Table:
    name: str
    columns: list
    rows: list = field(default_factory=list)


@dataclass
class RunRecord:
    command: str
    spec: dict
    tables: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    failure: str | None = None
    wall_time: float | None = None

    def versions(self) -> dict:
        return {"kzq": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _checksum(record: RunRecord) -> str:
    h = hashlib.sha256()
    for tab in record.tables:
        h.update(tab.name.encode())
        for row in tab.rows:
            h.update(",".join(_fmt(v) for v in row).encode())
            h.update(b"\n")
    for key in sorted(record.summary):
        h.update(f"{key}={_fmt(record.summary[key])}\n".encode())
    return h.hexdigest()[:16]


def render_csv(record: RunRecord) -> str:
    lines = [f"# command: {record.command}"]
    lines += [f"# {k}: {_fmt(v)}" for k, v in record.spec.items()]
    lines += [f"# version {k}: {v}" for k, v in record.versions().items()]
    lines += [f"# summary {k}: {_fmt(v)}" for k, v in sorted(record.summary.items())]
    if record.wall_time is not None:
        lines.append(f"# wall_time_s: {record.wall_time:.3f}")
    lines.append(f"# checksum: {_checksum(record)}")
    for tab in record.tables:
        lines.append(f"# table: {tab.name}")
        lines.append(",".join(tab.columns))
        lines += [",".join(_fmt(v) for v in row) for row in tab.rows]
    if record.failure:
        lines.append(f"# FAILED: {record.failure}")
    return "\n".join(lines) + "\n"


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return None if math.isnan(v) else float(f"{v:.12g}")


def render_json(record: RunRecord) -> str:
    doc = {
        "command": record.command,
        "spec": {k: _json_value(v) for k, v in record.spec.items()},
        "versions": record.versions(),
        "summary": {k: _json_value(v) for k, v in sorted(record.summary.items())},
        "tables": [
            {"name": t.name, "columns": t.columns, "rows": [[_json_value(v) for v in r] for r in t.rows]}
            for t in record.tables
        ],
        "checksum": _checksum(record),
        "failed": record.failure,
    }
    if record.wall_time is not None:
        doc["wall_time_s"] = round(record.wall_time, 3)
    return json.dumps(doc, indent=1) + "\n"


def _threads() -> int:
    raw = os.environ.get("KZQ_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"KZQ_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("KZQ_THREADS must be a positive integer")
    return n


def _sweep(fn, items, threads):
    """Ordered map over sweep points; stops at the first failure.

    Returns (results, error) where results holds the completed prefix.
    """
    results = []
    if threads <= 1:
        for it in items:
            try:
                results.append(fn(it))
            except (IntegrationError, PcfAccuracyError, ArithmeticError) as exc:
                return results, exc
        return results, None
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, it) for it in items]
        for fut in futures:
            try:
                results.append(fut.result())
            except (IntegrationError, PcfAccuracyError, ArithmeticError) as exc:
                for rest in futures:
                    rest.cancel()
                return results, exc
    return results, None


def _tau_range(text: str, log: bool):
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            lo, hi, n = v, v, 1
        elif len(parts) == 3:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        else:
            raise ValueError
    except ValueError:
        raise UsageError(f"--tau expects a value or min:max:points, got {text!r}") from None
    if lo < 0:
        raise UsageError("tau_Q must be non-negative")
    if len(parts) == 3:
        if not lo < hi:
            raise UsageError(f"--tau range needs min < max (got {lo} >= {hi})")
        if n < 2:
            raise UsageError("--tau range needs at least 2 points")
        if log and lo <= 0:
            raise UsageError("--log needs a positive lower bound")
    return (lo, hi, n, bool(log))


def _spec(args, output="csv") -> SweepSpec:
    if args.gi is None or not args.gi > 0:
        raise UsageError("--gi must be a positive number")
    if args.modes < 4 or args.modes % 2:
        raise UsageError("--modes must be an even number of sites >= 4")
    try:
        cfg = IntegratorConfig(rel_tol=args.rtol, abs_tol=args.atol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return SweepSpec(args.gi, _tau_range(args.tau, args.log), args.modes, cfg, output)


def _label(g, tau):
    return classify(g, tau).value


def _quiet(fn, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        return fn(*a, **kw)


def cmd_density(spec: SweepSpec, threads: int) -> RunRecord:
    grid = MomentumGrid(spec.grid_N)
    g = spec.g_i
    rec = RunRecord("density", spec.echo())
    tab = Table("density", ["tau_Q", "n_numeric", "n_kz", "n_ps", "n_s", "regime"])
    rec.tables.append(tab)

    def point(tau):
        m = evolve_mode(QuenchProtocol(g, tau), grid.q_values, spec.integrator)
        n = float(np.mean(excitation_probability(m)))
        n_kz = density_kz(tau) if tau > 0 else math.nan
        return [tau, n, n_kz, _quiet(density_ps, g, tau), _quiet(density_s, g, tau), _label(g, tau)]

    rows, err = _sweep(point, list(spec.taus), threads)
    tab.rows.extend(rows)
    if err:
        rec.failure = str(err)
    return rec


def cmd_spectrum(spec: SweepSpec, threads: int) -> RunRecord:
    grid = MomentumGrid(spec.grid_N)
    g = spec.g_i
    rec = RunRecord("spectrum", spec.echo())
    tab = Table("spectrum", ["tau_Q", "q", "p_numeric", "p_closed_form", "clamped", "regime"])
    rec.tables.append(tab)

    def point(tau):
        m = evolve_mode(QuenchProtocol(g, tau), grid.q_values, spec.integrator)
        p = excitation_probability(m)
        label = classify(g, tau)
        closed, clamped = spectrum_closed_form(label, g, tau, grid.q_values)
        return [[tau, q, pq, pc, clamped, label.value] for q, pq, pc in zip(grid.q_values, p, closed)]

    blocks, err = _sweep(point, list(spec.taus), threads)
    for b in blocks:
        tab.rows.extend(b)
    if err:
        rec.failure = str(err)
    return rec


def cmd_correlate(spec: SweepSpec, threads: int, r_max: int, collapse: bool) -> RunRecord:
    if r_max < 2:
        raise UsageError("--rmax must be at least 2")
    grid = MomentumGrid(spec.grid_N)
    g = spec.g_i
    echo = spec.echo()
    echo["r_max"] = r_max
    rec = RunRecord("correlate", echo)
    tab = Table("kink_kink", ["tau_Q", "R", "C_R", "nonmixed", "mixed"])
    rec.tables.append(tab)

    def point(tau):
        m = evolve_mode(QuenchProtocol(g, tau), grid.q_values, spec.integrator)
        cs = quadratic_correlators(m, r_max=r_max + 1, n_sites=grid.n_sites)
        return tau, kink_density(cs), kink_correlations(cs, r_max)

    results, err = _sweep(point, list(spec.taus), threads)
    ratios = Table("mixed_ratio", ["tau_Q", "n", "max_mixed_over_max_nonmixed"])
    for tau, n, kc in results:
        for r in range(r_max + 1):
            tab.rows.append([tau, r, kc.C[r], kc.nonmixed[r], kc.mixed[r]])
        ratio = np.nanmax(np.abs(kc.mixed[2:])) / np.nanmax(np.abs(kc.nonmixed[2:]))
        ratios.rows.append([tau, n, ratio])
    rec.tables.append(ratios)
    if err:
        rec.failure = str(err)
        return rec
    if collapse:
        if len(results) < 2:
            raise UsageError("--collapse needs a tau range")
        col = collapse_kkc({tau: kc.C for tau, _, kc in results})
        c1 = fit_c1kk([tau for tau, _, _ in results], [kc.C[1] for _, _, kc in results])
        rec.summary.update(
            {
                "delta": col.delta,
                "shape_amplitude": col.shape_amplitude,
                "collapse_misfit": col.quality,
                "xi_offset": col.xi_offset,
                "xi_slope": col.xi_slope,
                "window_lo": col.window[0],
                "window_hi": col.window[1],
                "c1_amplitude": c1.amplitude,
                "c1_activation": c1.exponent,
            }
        )
        rec.tables.append(Table("xi", ["tau_Q", "xi"], [[t, x] for t, x in col.xi_by_tau.items()]))
    return rec


def cmd_oscillate(spec: SweepSpec, threads: int, t_max: float, t_points: int) -> RunRecord:
    grid = MomentumGrid(spec.grid_N)
    g = spec.g_i
    echo = spec.echo()
    echo.update({"t_max": t_max, "t_points": t_points})
    rec = RunRecord("oscillate", echo)
    tab = Table("oscillation", ["tau_Q", "A", "M2", "phi", "A_su_minus_A", "M2_su_minus_M2", "regime"])
    rec.tables.append(tab)

    def params(tau):
        m = evolve_mode(QuenchProtocol(g, tau), grid.q_values, spec.integrator)
        return magnetization_params(quadratic_correlators(m, r_max=2, n_sites=grid.n_sites))

    sudden = params(0.0)
    taus = list(spec.taus)
    results, err = _sweep(params, taus, threads)
    for tau, o in zip(taus, results):
        tab.rows.append([tau, o.A, o.M**2, o.phi, sudden.A - o.A, sudden.M**2 - o.M**2, _label(g, tau)])
    rec.summary.update({"A_su": sudden.A, "M2_su": sudden.M**2})
    if err:
        rec.failure = str(err)
        return rec
    if t_max > 0:
        trace = Table("trace", ["tau_Q", "t", "sigma_z"])

        def one(tau):
            p = QuenchProtocol(g, tau, hold=True)
            ts = np.linspace(p.t_i, t_max, t_points)
            states = evolve_modes(p, grid.q_values, spec.integrator, times=ts)
            return [[tau, t, 2 * np.mean(np.abs(s.u) ** 2) - 1] for t, s in zip(ts, states)]

        blocks, err = _sweep(one, taus, threads)
        for b in blocks:
            trace.rows.extend(b)
        rec.tables.append(trace)
        if err:
            rec.failure = str(err)
    return rec


def cmd_regimes(spec: SweepSpec) -> RunRecord:
    g = spec.g_i
    rec = RunRecord("regimes", spec.echo())
    rec.tables.append(Table("regimes", ["tau_Q", "regime"], [[t, _label(g, t)] for t in spec.taus]))
    tp = turning_points(g) if g > 2 else None
    kz_ai, s_ai = _quiet(ai_estimates, g)
    rec.summary.update(
        {
            "tau_KZ": tp.tau_KZ if tp else math.nan,
            "tau_S": tp.tau_S if tp else math.nan,
            "tau_S_times_g2": tp.tau_S * g * g if tp else math.nan,
            "tau_KZ_adiabatic_impulse": kz_ai,
            "tau_S_adiabatic_impulse": s_ai,
        }
    )
    return rec


def cmd_verify() -> RunRecord:
    from .verify import run_all

    rec = RunRecord("verify", {})
    tab = Table("checks", ["check", "measured", "tolerance", "passed"])
    for c in run_all():
        tab.rows.append([c.name, c.measured, c.tolerance, c.passed])
    rec.tables.append(tab)
    failed = [r[0] for r in tab.rows if not r[3]]
    if failed:
        rec.failure = "; ".join(failed)
    return rec


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kzq", description="Linear quenches of the transverse-field Ising chain.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, tau_default=None):
        p.add_argument("--gi", type=float, required=True, help="initial transverse field g_i")
        p.add_argument("--tau", required=tau_default is None, default=tau_default,
                       help="quench time, or min:max:points")
        p.add_argument("--log", action="store_true", help="geometric spacing of the tau range")
        p.add_argument("--modes", type=int, default=4096, help="lattice sites N (N/2 momentum modes)")
        p.add_argument("--rtol", type=float, default=IntegratorConfig.rel_tol)
        p.add_argument("--atol", type=float, default=IntegratorConfig.abs_tol)
        output(p)

    def output(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--timing", action="store_true", help="record wall time (output no longer byte-stable)")

    common(sub.add_parser("density", help="defect density versus quench time"))
    common(sub.add_parser("spectrum", help="excitation spectrum p_q"))
    p = sub.add_parser("correlate", help="kink-kink correlations and their collapse")
    common(p)
    p.add_argument("--rmax", type=int, default=40)
    p.add_argument("--collapse", action="store_true", help="fit the PS-regime scaling collapse")
    p = sub.add_parser("oscillate", help="transverse magnetization oscillation")
    common(p)
    p.add_argument("--tmax", type=float, default=0.0, help="also emit <sigma^z(t)> traces up to this time")
    p.add_argument("--tpoints", type=int, default=400)
    p = sub.add_parser("regimes", help="regime labels and turning points")
    common(p, tau_default="1e-4:100:13")
    p.set_defaults(log=True)
    output(sub.add_parser("verify", help="oracle cross-checks and invariants"))
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        threads = _threads()
        if args.command == "verify":
            rec = cmd_verify()
        else:
            spec = _spec(args, args.format)
            if args.command == "density":
                rec = cmd_density(spec, threads)
            elif args.command == "spectrum":
                rec = cmd_spectrum(spec, threads)
            elif args.command == "correlate":
                rec = cmd_correlate(spec, threads, args.rmax, args.collapse)
            elif args.command == "oscillate":
                if args.tpoints < 2:
                    raise UsageError("--tpoints must be at least 2")
                if args.tmax < 0:
                    raise UsageError("--tmax must be non-negative")
                rec = cmd_oscillate(spec, threads, args.tmax, args.tpoints)
            else:
                rec = cmd_regimes(spec)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kzq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.timing:
        rec.wall_time = time.perf_counter() - start
    text = render_json(rec) if args.format == "json" else render_csv(rec)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if rec.failure:
        print(f"kzq: numerical failure: {rec.failure}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
