import csv
import io
import json

import numpy as np
import pytest

from sparcs import cli

CODE = ["--L", "32", "--M", "16", "--R", "0.8"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_pa_csv(capsys):
    code, out, _ = run(capsys, "pa", "--L", "16", "--R", "1.0", "--snr", "15", "--pa", "exponential")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 17
    assert sum(float(r[-1]) for r in rows[1:]) == pytest.approx(15.0)


def test_se_csv(capsys):
    code, out, _ = run(capsys, "se", *CODE, "--snr", "15")
    assert code == 0
    assert len(out.splitlines()) >= 2


def test_predict_json(capsys):
    code, out, _ = run(capsys, "predict", *CODE, "--ebn0", "6", "--per-section")
    assert code == 0
    d = json.loads(out)
    assert 0 <= d["esec"] <= 1 and 0 <= d["ecw"] <= 1
    assert len(d["per_section"]) == 32 and d["R"] >= 0.8


def test_encode_decode_round_trip(tmp_path, capsys):
    y = tmp_path / "y.npy"
    bits = tmp_path / "bits.txt"
    args = [*CODE, "--snr", "15", "--pa", "flat", "--seed", "4"]
    assert run(capsys, "encode", *args, "--noise-seed", "1", "--out", str(y),
               "--bits-out", str(bits))[0] == 0
    code, out, _ = run(capsys, "decode", *args, str(y))
    assert code == 0
    d = json.loads(out)
    assert d["bits"] == bits.read_text().strip()
    assert d["iterations"] >= 1 and len(d["tau2_trace"]) in (d["iterations"], d["iterations"] + 1)
    assert d["termination"] in ("converged", "max_iterations")
    assert d["estimated_section_errors"] >= 0


def test_encode_explicit_bits_text(tmp_path, capsys):
    msg = "01" * 64
    x = tmp_path / "x.txt"
    args = ["--L", "32", "--M", "16", "--R", "1.0", "--snr", "15", "--pa", "flat"]
    assert run(capsys, "encode", *args, "--bits", msg, "--out", str(x))[0] == 0
    assert np.loadtxt(x).shape == (128,)
    d = json.loads(run(capsys, "decode", *args, "--max-iter", "100", str(x))[1])
    assert d["bits"] == msg


def test_simulate_csv_and_json(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", *CODE, "--ebn0", "3", "5", "--trials", "3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["ebn0_db"]) for r in rows] == [3.0, 5.0]
    dest = tmp_path / "r.json"
    assert run(capsys, "simulate", *CODE, "--ebn0", "5", "--trials", "2", "--records",
               "--out", str(dest))[0] == 0
    blob = json.loads(dest.read_text())
    assert len(blob["records"]) == 2 and blob["config"]["trials"] == 2


def test_simulate_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"L": 32, "M": 16, "R": 0.8, "ebn0_db": [4.0], "trials": 5}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--trials", "2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["trials"] == "2"


def test_simulate_rpa_sweep(capsys):
    code, out, _ = run(capsys, "simulate", *CODE, "--ebn0", "5", "--trials", "1", "--rpa-sweep", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 3 and rows[0]["r_pa"] != rows[2]["r_pa"]


@pytest.mark.parametrize("argv", [
    ["simulate", "--L", "32", "--trials", "1"],                       # missing M and R
    ["simulate", "--config", "/nonexistent.json"],
    ["pa", "--L", "16", "--R", "-1", "--snr", "15"],
    ["predict", "--L", "32", "--M", "12", "--R", "1", "--snr", "15"],  # M not a power of two
])
def test_errors_exit_nonzero(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_bad_bits_rejected(capsys):
    code, _, err = run(capsys, "encode", *CODE, "--snr", "15", "--bits", "0120")
    assert code == 2
