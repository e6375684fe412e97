import json
import math
import subprocess
import sys

import numpy as np
import pytest

from kzq import cli
from kzq.integrator import IntegrationError
from kzq.scaling import extremum_period
from kzq.verify import Check


def _tables(text):
    """{name: (columns, rows)} from CSV output; cells stay strings."""
    out, name = {}, None
    for line in text.splitlines():
        if line.startswith("# table: "):
            name = line[len("# table: "):]
            out[name] = (None, [])
        elif line.startswith("#") or name is None:
            continue
        elif out[name][0] is None:
            out[name] = (line.split(","), [])
        else:
            out[name][1].append(line.split(","))
    return out


def _column(tables, table, col, cast=float):
    cols, rows = tables[table]
    k = cols.index(col)
    return [cast(r[k]) for r in rows]


def _header(text, key):
    for line in text.splitlines():
        if line.startswith(f"# {key}: "):
            return line.split(": ", 1)[1]
    raise KeyError(key)


@pytest.fixture
def kzq(capsys, monkeypatch):
    monkeypatch.setenv("KZQ_THREADS", "1")

    def call(*argv):
        try:
            code = cli.run([str(a) for a in argv])
        except SystemExit as exc:  # argparse errors
            code = exc.code
        out, err = capsys.readouterr()
        return code, out, err

    return call


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [
            ["density", "--gi", "8", "--tau", "10:1:5"],
            ["density", "--gi", "8", "--tau", "1:10:1"],
            ["density", "--gi", "8", "--tau", "0:10:5", "--log"],
            ["density", "--gi", "0", "--tau", "1"],
            ["density", "--gi", "8", "--tau", "1", "--modes", "7"],
            ["density", "--gi", "8", "--tau", "x"],
            ["density", "--tau", "1"],
            ["density", "--gi", "8", "--tau", "1", "--format", "xml"],
            ["density", "--gi", "8", "--tau", "1", "--rtol", "0"],
            ["correlate", "--gi", "8", "--tau", "1", "--rmax", "1"],
            ["correlate", "--gi", "8", "--tau", "1", "--collapse"],
            ["oscillate", "--gi", "8", "--tau", "1", "--tpoints", "1"],
            ["nonsense"],
        ],
    )
    def test_exit_one(self, kzq, argv):
        code, out, err = kzq(*argv)
        assert code == 1
        assert out == ""
        assert "error" in err

    def test_thread_variable(self, kzq, monkeypatch):
        monkeypatch.setenv("KZQ_THREADS", "0")
        assert kzq("regimes", "--gi", "8")[0] == 1


class TestDensity:
    def test_kz_row(self, kzq):
        code, out, _ = kzq("density", "--gi", "8", "--tau", "10")
        assert code == 0
        t = _tables(out)
        assert _column(t, "density", "regime", str) == ["KZ"]
        n, n_kz = _column(t, "density", "n_numeric")[0], _column(t, "density", "n_kz")[0]
        assert abs(n - n_kz) / n_kz < 0.02

    def test_log_sweep(self, kzq):
        # 1024 sites keep the runtime down; the row count and ordering do not
        # depend on the grid
        code, out, _ = kzq("density", "--gi", "8", "--tau", "1e-4:100:60", "--log", "--modes", "1024")
        assert code == 0
        t = _tables(out)
        tau = np.array(_column(t, "density", "tau_Q"))
        n = np.array(_column(t, "density", "n_numeric"))
        labels = np.array(_column(t, "density", "regime", str))
        assert len(tau) == 60
        np.testing.assert_allclose(tau[[0, -1]], [1e-4, 100], rtol=1e-11)
        np.testing.assert_allclose(np.diff(np.log(tau)), math.log(1e6) / 59, rtol=1e-9)
        for label in ("S", "PS", "KZ"):
            assert np.all(np.diff(n[labels == label]) < 0)
        assert _header(out, "grid_N") == "1024"

    def test_spec_echo(self, kzq):
        _, out, _ = kzq("density", "--gi", "8", "--tau", "0.5:1:2", "--modes", "64", "--rtol", "1e-9")
        assert _header(out, "g_i") == "8"
        assert _header(out, "rel_tol") == "1e-09"
        assert _header(out, "version numpy") == np.__version__


class TestSpectrum:
    def test_columns(self, kzq):
        code, out, _ = kzq("spectrum", "--gi", "8", "--tau", "50", "--modes", "256")
        assert code == 0
        t = _tables(out)
        p = np.array(_column(t, "spectrum", "p_numeric"))
        closed = np.array(_column(t, "spectrum", "p_closed_form"))
        assert len(p) == 128
        assert np.all((p >= 0) & (p <= 1))
        assert np.max(np.abs(p - closed)) < 0.05


class TestCorrelate:
    def test_mixed_ratio_column(self, kzq):
        code, out, _ = kzq("correlate", "--gi", "6", "--tau", "0.8", "--rmax", "40", "--modes", "1024")
        assert code == 0
        t = _tables(out)
        mixed = np.array(_column(t, "kink_kink", "mixed"))
        nonmixed = np.array(_column(t, "kink_kink", "nonmixed"))
        ratio = _column(t, "mixed_ratio", "max_mixed_over_max_nonmixed")[0]
        assert len(mixed) == 41
        assert ratio == pytest.approx(np.max(np.abs(mixed[2:])) / np.max(np.abs(nonmixed[2:])), rel=1e-9)
        assert ratio > 1

    def test_collapse_reports_unit_dimension(self, kzq):
        code, out, _ = kzq("correlate", "--gi", "8", "--tau", "0.2:0.9:8", "--collapse", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["summary"]["delta"] == pytest.approx(1.0, abs=0.1)
        assert doc["summary"]["window_lo"] == 0.3
        assert doc["summary"]["window_hi"] == 5.0


class TestOscillate:
    def test_free_trace_period(self, kzq):
        code, out, _ = kzq("oscillate", "--gi", "6", "--tau", "0.8", "--tmax", "12.566370614359172",
                           "--tpoints", "4001", "--modes", "1024")
        assert code == 0
        t = _tables(out)
        time = np.array(_column(t, "trace", "t"))
        sz = np.array(_column(t, "trace", "sigma_z"))
        free = time >= 0
        assert abs(extremum_period(time[free], sz[free], skip=0) - math.pi / 2) < 1e-3

    def test_deficits(self, kzq):
        code, out, _ = kzq("oscillate", "--gi", "32", "--tau", "1e-5:1e-1:6", "--log", "--modes", "1024")
        assert code == 0
        t = _tables(out)
        assert np.all(np.array(_column(t, "oscillation", "A_su_minus_A")) > 0)
        assert np.all(np.diff(_column(t, "oscillation", "M2_su_minus_M2")) > 0)


class TestRegimes:
    def test_defaults(self, kzq):
        code, out, _ = kzq("regimes", "--gi", "8")
        assert code == 0
        assert len(_tables(out)["regimes"][1]) == 13
        assert float(_header(out, "summary tau_KZ")) == pytest.approx(1.037, abs=1e-3)


class TestOutput:
    def test_byte_stable(self, kzq):
        argv = ("density", "--gi", "8", "--tau", "0.1:2:3", "--modes", "128")
        assert kzq(*argv)[1] == kzq(*argv)[1]

    def test_json_matches_csv(self, kzq):
        argv = ("density", "--gi", "8", "--tau", "0.1:2:3", "--modes", "128")
        csv = kzq(*argv)[1]
        doc = json.loads(kzq(*argv, "--format", "json")[1])
        assert doc["checksum"] == _header(csv, "checksum")
        assert doc["command"] == "density"
        (table,) = doc["tables"]
        assert table["name"] == "density"
        assert len(table["rows"]) == 3
        assert doc["failed"] is None

    def test_timing_is_opt_in(self, kzq):
        argv = ("regimes", "--gi", "8")
        assert "wall_time_s" not in kzq(*argv)[1]
        assert "wall_time_s" in kzq(*argv, "--timing")[1]

    def test_out_file(self, kzq, tmp_path):
        path = tmp_path / "r.csv"
        code, out, _ = kzq("regimes", "--gi", "8", "--out", path)
        assert code == 0 and out == ""
        assert path.read_text().startswith("# command: regimes")


class TestFailures:
    def test_partial_flush(self, kzq, monkeypatch):
        real = cli.evolve_mode

        def flaky(p, q, cfg=None):
            if p.tau_Q > 1:
                raise IntegrationError("step size underflow")
            return real(p, q, cfg)

        monkeypatch.setattr(cli, "evolve_mode", flaky)
        code, out, err = kzq("density", "--gi", "8", "--tau", "0.5:2:4", "--modes", "64")
        assert code == 2
        assert len(_tables(out)["density"][1]) == 2
        assert "# FAILED:" in out
        assert "underflow" in err

    def test_verify_failure_exit(self, kzq, monkeypatch):
        monkeypatch.setattr("kzq.verify.run_all", lambda: [Check("ok", 0.0, 1.0), Check("bad", 2.0, 1.0)])
        code, out, _ = kzq("verify")
        assert code == 2
        assert "# FAILED: bad" in out

    def test_verify_default_run(self, kzq):
        code, out, _ = kzq("verify")
        assert code == 0
        names = _column(_tables(out), "checks", "check", str)
        passed = _column(_tables(out), "checks", "passed", str)
        assert any("ODE" in n for n in names)
        assert any("N=10" in n for n in names)
        assert set(passed) == {"true"}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "kzq", "regimes", "--gi", "8", "--tau", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "# command: regimes" in res.stdout
