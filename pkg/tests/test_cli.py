from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from annular_green import greens
from annular_green.cli import fmt, read_config, run

PROFILE = ["--V0", "1", "--a", "2", "--b", "1"]


def call(args):
    out, err = io.StringIO(), io.StringIO()
    code = run(args, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def parse_text(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line)


def test_eval_fixture(reference):
    want = next(r["G"] for r in reference["green"]
                if (r["l"], r["r"], r["rp"], r["E"], r["a"]) == (0, 0.5, 0.7, 2.0, 2.0))
    code, out, _ = call(["eval", "--l", "0", "--r", "0.5", "--rp", "0.7", "--E", "2", *PROFILE])
    assert code == 0
    rec = parse_text(out)
    assert float(rec["G"]) == pytest.approx(want, rel=1e-10)
    assert rec["region"] == "inner" and rec["block"] == "G11"
    assert rec["units"] == "reduced (2M=hbar=1)"
    assert float(rec["pole_margin"]) > 1e-12


def test_sum_reports_lmax():
    code, out, _ = call(["sum", "--r", "0.5", "--rp", "0.7", "--theta", "0", "--thetap", "1",
                         "--E", "2", *PROFILE, "--format", "json"])
    assert code == 0
    rec = json.loads(out)["records"][0]
    assert rec["lmax_used"] > 0
    assert isinstance(rec["G"], float)


def test_curve_csv(tmp_path):
    path = tmp_path / "curve.csv"
    args = ["curve", "--l", "0,1,2", "--kmin", "1.05", "--kmax", "8", "--samples", "2000",
            *PROFILE, "--out", str(path)]
    assert call(args)[0] == 0
    raw = path.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(io.StringIO(raw.decode())))
    assert rows[0] == ["k", "delta_l0", "delta_l1", "delta_l2"]
    assert len(rows) == 2001
    # 17 significant digits round-trip bit for bit
    for cell in rows[1][1:] + rows[-1]:
        assert fmt(float(cell)) == cell
    assert call(args)[0] == 0
    assert path.read_bytes() == raw


def test_curve_default_orders():
    code, out, _ = call(["curve", "--kmin", "1.5", "--kmax", "2", "--samples", "3", *PROFILE])
    assert code == 0
    assert out.splitlines()[0] == "k,delta_l0,delta_l1,delta_l2"


def test_resonances_empty_bracket():
    code, out, _ = call(["resonances", "--l", "0", "--kmin", "2", "--kmax", "2.000000001",
                         "--samples", "2", *PROFILE])
    assert code == 0
    assert out == "l,k_star,e_star,residual,beta_gap,g_at_root\n"


def test_resonances_rows(reference):
    code, out, _ = call(["resonances", "--l", "1,2", "--kmin", "1.05", "--kmax", "8", *PROFILE])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    want = sorted((r["l"], r["k_star"]) for r in reference["roots"])
    got = [(int(r["l"]), float(r["k_star"])) for r in rows]
    assert [g[0] for g in got] == [w[0] for w in want]
    for (_, g), (_, w) in zip(got, want):
        assert g == pytest.approx(w, abs=1e-10)


def test_validate_text():
    code, out, _ = call(["validate", "--l", "0", "--E", "2", *PROFILE, "--points", "4"])
    assert code == 0
    rec = parse_text(out)
    assert float(rec["oracle_deviation"]) <= 1e-6
    assert rec["units"] == "reduced (2M=hbar=1)"


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# ring\nV0 = 1\na = 2\nb = 1   # inner radius\nE = 4\nl = 0\nr = 0.5\nrp = 0.7\n")
    assert read_config(cfg)["b"] == "1"
    _, from_file, _ = call(["eval", "--config", str(cfg)])
    _, overridden, _ = call(["eval", "--config", str(cfg), "--E", "2"])
    _, direct, _ = call(["eval", "--l", "0", "--r", "0.5", "--rp", "0.7", "--E", "2", *PROFILE])
    assert parse_text(from_file)["E"] == "4"
    assert overridden == direct


@pytest.mark.parametrize("text", ["foo = 1\n", "just words\n", "E = two\n"])
def test_bad_config_exit_2(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    code, _, err = call(["eval", "--config", str(cfg), "--l", "0", "--r", "0.5", "--rp", "0.7",
                         "--E", "2", *PROFILE])
    assert code == 2
    assert "error" in err


@pytest.mark.parametrize("args", [
    ["eval", "--l", "0", "--r", "0.5", "--rp", "0.7", "--E", "0.5", *PROFILE],
    ["eval", "--l", "0", "--r", "0.5", "--rp", "1.5", "--E", "2", *PROFILE],
    ["eval", "--l", "0,1", "--r", "0.5", "--rp", "0.7", "--E", "2", *PROFILE],
    ["eval", "--r", "0.5", "--rp", "0.7", "--E", "2", *PROFILE],
    ["eval", "--l", "0", "--r", "0.5", "--rp", "0.7", "--E", "2", "--V0", "1", "--a", "1",
     "--b", "2"],
    ["resonances", "--l", "0", "--kmin", "3", "--kmax", "2", *PROFILE],
    ["eval", "--format", "xml"],
    ["frobnicate"],
    [],
    ["--config", "missing.cfg"],
])
def test_invalid_input_exit_2(args):
    assert call(args)[0] == 2


def test_near_pole_exit_3(reference):
    k_star = next(r["k_star"] for r in reference["roots"] if r["l"] == 1)
    e = fmt(k_star ** 2)
    code, _, err = call(["eval", "--l", "1", "--r", "1.2", "--rp", "1.5", "--E", e, *PROFILE,
                         "--scheme", "published"])
    assert code == 3
    assert "near-pole" in err
    code, _, _ = call(["validate", "--l", "1", "--E", e, *PROFILE, "--scheme", "published",
                       "--points", "3"])
    assert code == 3


def test_delta_forms_disagreement_exit_4(monkeypatch):
    real = greens.published_cascade

    def skewed(*args):
        out = dict(real(*args))
        out["delta_gamma_form"] = out["delta"] * (1 + 1e-6)
        return out

    monkeypatch.setattr(greens, "published_cascade", skewed)
    greens._coefficients.cache_clear()
    try:
        code, _, err = call(["validate", "--l", "0", "--E", "3", *PROFILE, "--points", "3"])
    finally:
        greens._coefficients.cache_clear()
    assert code == 4
    assert "delta" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "annular_green", "eval", "--l", "0",
                           "--r", "0.5", "--rp", "0.7", "--E", "2", *PROFILE],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "G = " in proc.stdout
