import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

import periodic_heat.study as study_mod
from periodic_heat.cli import eval_pi, main
from periodic_heat.study import CSV_COLUMNS, read_csv


def parse_kv(text):
    out = {}
    for line in text.splitlines():
        key, _, value = line.partition("=")
        out.setdefault(key, value)
    return out


@pytest.mark.parametrize("text,value", [("0", 0.0), ("1.5", 1.5), ("pi", math.pi), ("0.5pi", 0.5 * math.pi),
                                        ("2*pi", 2 * math.pi)])
def test_eval_pi(text, value):
    assert eval_pi(text) == value


def test_study_config_with_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    out = tmp_path / "rows.csv"
    cfg.write_text(json.dumps({"nu_list": [10.0], "beta_list": [0.0], "n_list": [4, 8], "output": "ignored.csv"}))
    assert main(["study", "--config", str(cfg), "--out", str(out), "--nu", "1", "--beta", "0,0.5pi",
                 "--no-timing"]) == 0
    rows = read_csv(out)
    assert [(r.nu, r.n) for r in rows] == [(1.0, 4), (1.0, 8), (1.0, 4), (1.0, 8)]
    assert rows[2].beta == 0.5 * math.pi
    assert all(r.runtime_ms == 0 for r in rows)


def test_study_explicit_m_to_stdout(capsys):
    assert main(["study", "--nu", "1", "--beta", "0", "--n", "4,8", "--m", "5,9"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert [line.split(",")[3] for line in lines[1:]] == ["5", "9"]


def test_study_deterministic_output(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["study", "--nu", "0.1,1", "--beta", "0", "--n", "4,8", "--no-timing", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_study_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_list": []}))
    assert main(["study", "--config", str(cfg)]) == 1
    assert "periodic-heat study: error: n_list must be nonempty" in capsys.readouterr().err


def test_study_unwritable_output(tmp_path, capsys):
    out = tmp_path / "missing" / "x.csv"
    assert main(["study", "--nu", "1", "--beta", "0", "--n", "4", "--out", str(out)]) == 1
    assert str(out) in capsys.readouterr().err


def test_study_failure_emits_partial_rows(tmp_path, monkeypatch, capsys):
    real = study_mod.run_case

    def flaky(nu, beta, n, m, *args, **kwargs):
        if n == 8:
            raise ArithmeticError("synthetic failure")
        return real(nu, beta, n, m, *args, **kwargs)

    monkeypatch.setattr(study_mod, "run_case", flaky)
    out = tmp_path / "partial.csv"
    assert main(["study", "--nu", "1", "--beta", "0", "--n", "4,8,16", "--out", str(out)]) == 1
    assert [r.n for r in read_csv(out)] == [4]
    assert "synthetic failure" in capsys.readouterr().err


def test_solve_csv(tmp_path):
    out = tmp_path / "sol.csv"
    assert main(["solve", "--nu", "1", "--beta", "0.5pi", "--n", "8", "--m", "16", "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:2] == ["j", "t"] and len(rows[0]) == 2 + 7
    assert float(rows[0][2].removeprefix("x=")) == 0.125
    assert len(rows) == 1 + 17
    data = np.array(rows[1:], dtype=float)
    assert data[-1, 1] == 1.0
    np.testing.assert_allclose(data[0, 2:], data[-1, 2:], atol=1e-10)
    # beta = pi/2 puts the t=0 profile close to sin(2 pi x)
    x = np.arange(1, 8) / 8
    np.testing.assert_allclose(data[0, 2:], np.sin(2 * np.pi * x), atol=0.05)


def test_bounds_output(capsys):
    assert main(["bounds", "--nu", "1", "--T", "1", "--n", "4", "--m", "16"]) == 0
    kv = parse_kv(capsys.readouterr().out)
    assert float(kv["kappa1"]) == pytest.approx(3.0841e-5, rel=1e-4)
    assert float(kv["K1"]) == pytest.approx(3.4643, rel=1e-4)
    assert float(kv["K2"]) == pytest.approx(3.3167, rel=1e-4)
    assert float(kv["f_norm"]) == pytest.approx(19.9877, rel=1e-5)
    assert float(kv["h1_bound"]) == pytest.approx(16.296, rel=1e-4)
    assert kv["rigorous"] == "False"
    assert {"l2_bound", "mu_min", "continuous.energy", "underflow_clamped"} <= kv.keys()


def test_bounds_needs_f_norm_off_unit_period(capsys):
    assert main(["bounds", "--nu", "1", "--T", "2", "--n", "4", "--m", "16"]) == 1
    assert "--f-norm" in capsys.readouterr().err
    assert main(["bounds", "--nu", "1", "--T", "2", "--n", "4", "--m", "16", "--f-norm", "1"]) == 0


def test_bounds_f_norm_homogeneity(capsys):
    main(["bounds", "--nu", "0.1", "--n", "8", "--m", "64", "--f-norm", "1"])
    one = parse_kv(capsys.readouterr().out)
    main(["bounds", "--nu", "0.1", "--n", "8", "--m", "64", "--f-norm", "4"])
    four = parse_kv(capsys.readouterr().out)
    assert float(four["h1_bound"]) == 4 * float(one["h1_bound"])


def test_bounds_invalid_input(capsys):
    assert main(["bounds", "--nu", "-1", "--n", "4", "--m", "4"]) == 1
    assert "periodic-heat bounds: error:" in capsys.readouterr().err


def test_missing_required_argument():
    with pytest.raises(SystemExit) as info:
        main(["solve", "--nu", "1"])
    assert info.value.code != 0


def test_console_module_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "periodic_heat", "bounds", "--nu", "1", "--n", "4", "--m", "4"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("nu=")
