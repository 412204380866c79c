import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from lhvlab import cli


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_thresholds_csv(capsys):
    rc, out, _ = run(capsys, "thresholds", "--family", "werner", "--dmax", "4")
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["d"]) for r in rows] == [2, 3, 4]
    assert float(rows[0]["p_pm"]) == pytest.approx(0.5)
    assert float(rows[1]["p_sep"]) == pytest.approx(0.25)


def test_thresholds_to_file(capsys, tmp_path):
    path = tmp_path / "t.csv"
    rc, out, _ = run(capsys, "thresholds", "--family", "noisy", "--dmax", "3", "--out", str(path))
    assert rc == 0 and out == ""
    assert len(path.read_text().strip().splitlines()) == 3


def test_simulate_passes_at_threshold(capsys):
    rc, out, _ = run(capsys, "simulate", "--model", "werner", "--d", "3", "--samples", "20000",
                     "--seed", "5", "--n-settings", "2")
    report = json.loads(out)
    assert rc == 0 and report["pass"]


def test_simulate_fails_above_threshold(capsys):
    rc, out, _ = run(capsys, "simulate", "--model", "werner", "--d", "2", "--p", "0.9",
                     "--samples", "50000", "--seed", "1", "--n-settings", "3")
    assert rc == 1 and not json.loads(out)["pass"]


@pytest.mark.parametrize("argv", [
    ["simulate", "--samples", "1000", "--seed", "1"],
    ["simulate", "--samples", "20000"],
    ["integrals", "--seed", "1"],
    ["simulate", "--samples", "20000", "--seed", "1", "--d", "1"],
])
def test_invalid_input_exit_code(capsys, argv):
    rc, out, err = run(capsys, *argv)
    assert rc == 2 and out == "" and err.startswith("lhvlab")


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "barrett", "d": 3, "samples": 20000, "seed": 2, "n_settings": 1}))
    rc, out, _ = run(capsys, "simulate", "--config", str(cfg), "--seed", "3")
    report = json.loads(out)
    assert rc == 0
    assert report["model"] == "barrett" and report["seed"] == 3


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "chsh", "--config", str(cfg))[0] == 2
    cfg.write_text("{not json")
    assert run(capsys, "chsh", "--config", str(cfg))[0] == 2
    assert run(capsys, "chsh", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_same_seed_same_bytes(capsys):
    argv = ["simulate", "--model", "almeida-iso-povm", "--d", "2", "--samples", "10000",
            "--seed", "11", "--n-settings", "2"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


@pytest.mark.parametrize("state,p,rc", [("werner", 0.72, 0), ("product", None, 0), ("bvqb", 0.5, 0)])
def test_chsh(capsys, state, p, rc):
    argv = ["chsh", "--state", state, "--restarts", "5"]
    if p is not None:
        argv += ["--p", str(p)]
    code, out, _ = run(capsys, *argv)
    assert code == rc and json.loads(out)["pass"]


def test_integrals_small(capsys):
    rc, out, _ = run(capsys, "integrals", "--d", "2,3", "--samples", "200000", "--seed", "4",
                     "--rel-tol", "0.05")
    assert rc == 0 and json.loads(out)["pass"]


def test_toner_small(capsys):
    rc, out, _ = run(capsys, "toner", "--K", "10", "--pairs", "5", "--samples", "20000", "--seed", "6")
    assert rc == 0 and json.loads(out)["pass"]


def test_argparse_rejects_unknown_model(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--model", "nope"])
    assert exc.value.code == 2


@pytest.mark.skipif(shutil.which("lhvlab") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["lhvlab", "thresholds", "--dmax", "2"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("family,d,")


def test_module_entry():
    out = subprocess.run([sys.executable, "-m", "lhvlab.cli", "thresholds", "--dmax", "2"],
                         capture_output=True, text=True)
    assert out.returncode == 0


def test_chsh_bvqb_out_of_range(capsys):
    assert run(capsys, "chsh", "--state", "bvqb", "--p", "0.6")[0] == 2
