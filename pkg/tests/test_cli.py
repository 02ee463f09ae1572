import json
from pathlib import Path

import numpy as np
import pytest

from hfmoments import __version__
from hfmoments.cli import main
from hfmoments.config import DEFAULTS, load_config
from hfmoments.dipole import rows_from_csv
from hfmoments.fixtures import data_path
from hfmoments.noise import load_sampled_table

H2_CONFIG = str(Path(__file__).resolve().parents[1] / "configs" / "h2.ini")

NOISY_H2 = """\
[system]
fcidump = fixture:h2_field
dipole = fixture:h2_field
[noise]
enabled = true
q = 0.05
shots = 2000
resamples = 6
[scan]
methods = B C
grid = log 1e-3 1e-1 4
"""


def _write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _comment_value(text, key):
    for line in text.splitlines():
        if line.startswith(f"# {key} "):
            return line.split(" ", 2)[2]
    raise KeyError(key)


def test_print_defaults(capsys):
    assert main(["validate", "--print-defaults"]) == 0
    printed = capsys.readouterr().out
    assert printed == DEFAULTS
    assert load_config(text=printed).config_hash() == load_config().config_hash()


def test_validate_bundled_h2(capsys):
    assert main(["validate", "--config", H2_CONFIG]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.strip().endswith("checks passed")


def test_validate_rejects_overlap_before_work(tmp_path, capsys):
    path = _write(tmp_path, "[system]\nfrozen_core = 0\nmoment_frozen = 0\n")
    assert main(["validate", "--config", path]) == 1
    assert "frozen both" in capsys.readouterr().err


def test_validate_rejects_q_one(tmp_path):
    assert main(["validate", "--config", _write(tmp_path, "[noise]\nq = 1\n")]) == 1


def test_corrupt_integrals_are_runtime_errors(tmp_path, capsys):
    (tmp_path / "bad.fcidump").write_text(data_path("h2.fcidump").read_text() + " 0.5 1 1 x 1\n")
    path = _write(tmp_path, "[system]\nfcidump = bad.fcidump\ndipole = fixture:h2\n")
    assert main(["fci", "--config", path]) == 2
    assert "stage system" in capsys.readouterr().err


def test_scan_h2_reaches_fci(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["scan", "--config", H2_CONFIG, "--out", str(out)]) == 0
    ref = json.loads((out / "references.json").read_text())
    for m in "ABCDE":
        text = (out / f"scan_analytic_{m}.csv").read_text()
        assert _comment_value(text, "hfmoments") == __version__
        assert _comment_value(text, "config_hash") == load_config(H2_CONFIG).config_hash()
        rows = rows_from_csv(text)
        assert abs(rows[0].mu_L - ref["mu_fci"]) < 1e-6
    assert (out / "energy_curve.csv").exists()
    assert "mu_L_au" in (out / "summary.txt").read_text()
    assert "E_FCI" in capsys.readouterr().out


def test_scan_is_deterministic_across_runs_and_threads(tmp_path):
    path = _write(tmp_path, NOISY_H2)
    runs = [("a", "1"), ("b", "1"), ("c", "4")]
    for name, threads in runs:
        assert main(["scan", "--config", path, "--out", str(tmp_path / name), "--threads", threads]) == 0
    for f in ("scan_sampled_B.csv", "scan_sampled_C.csv", "energy_curve.csv", "references.json"):
        first = (tmp_path / "a" / f).read_bytes()
        assert all((tmp_path / name / f).read_bytes() == first for name, _ in runs[1:])
    rows = rows_from_csv((tmp_path / "a" / "scan_sampled_B.csv").read_text())
    assert all(r.mu_L_std > 0 and r.mu_expect_std > 0 for r in rows)
    assert main(["scan", "--config", path, "--out", str(tmp_path / "d"), "--seed", "1"]) == 0
    assert (tmp_path / "d" / "scan_sampled_B.csv").read_bytes() != (tmp_path / "a" / "scan_sampled_B.csv").read_bytes()


def test_scan_tables_reload(tmp_path):
    path = _write(tmp_path, NOISY_H2)
    assert main(["scan", "--config", path, "--out", str(tmp_path / "o")]) == 0
    problem = load_config(path).build_problem()
    trial = load_sampled_table(tmp_path / "o" / "tables" / "trial", problem.plan)
    assert trial.spec.shots_per_group == 2000
    assert np.array_equal(trial.rederive().values, trial.table.values)


def test_water_method_c_flags_large_delta(tmp_path):
    text = ("[system]\nfcidump = fixture:water\ndipole = fixture:water\nfrozen_core = 0\nmoment_frozen = 1 4\n"
            "energy_shift = none\n[noise]\nenabled = true\nq = 0.1\nshots = 25000\nresamples = 0\n"
            "[scan]\nmethods = B C\ngrid = log 1e-4 1e-1 12\n")
    out = tmp_path / "w"
    assert main(["scan", "--config", _write(tmp_path, text), "--out", str(out)]) == 0
    b = rows_from_csv((out / "scan_sampled_B.csv").read_text())
    c = rows_from_csv((out / "scan_sampled_C.csv").read_text())
    assert sum(r.flagged for r in c) > sum(r.flagged for r in b)
    assert c[-1].flagged and not c[0].flagged


def _calibration(capsys, tmp_path, noise):
    path = _write(tmp_path, "[system]\nfcidump = fixture:h2_field\ndipole = fixture:h2_field\n[noise]\n" + noise)
    assert main(["calibrate", "--config", path]) == 0
    out = capsys.readouterr().out
    rows = [ln.split("\t") for ln in out.splitlines() if ln.startswith(("trial", "reference"))]
    return rows, out


def test_calibrate_noiseless(capsys, tmp_path):
    rows, _ = _calibration(capsys, tmp_path, "enabled = true\nq = 0\nshots = 0\n")
    values = [float(v) for r in rows for v in r[4:6]]
    assert np.nanmax(values) < 1e-12


def test_calibrate_matched_channel(capsys, tmp_path):
    rows, _ = _calibration(capsys, tmp_path, "enabled = true\nq = 0.1\nshots = 0\n")
    before = [float(r[4]) for r in rows if r[0] == "reference"]
    after = [float(r[5]) for r in rows if r[0] == "reference"]
    assert np.nanmax(before) > 0.05
    assert np.nanmax(after) < 1e-10


def test_calibrate_sampled_summary(capsys, tmp_path):
    _, out = _calibration(capsys, tmp_path, "enabled = true\nq = 0.05\nshots = 2000\n")
    summary = out.split("# summary by order in mu")[1].splitlines()[2:]
    assert [int(ln.split("\t")[0]) for ln in summary][:2] == [0, 1]


def test_fci_and_moments_commands(tmp_path, capsys):
    assert main(["fci", "--config", H2_CONFIG, "--out", str(tmp_path)]) == 0
    ref = json.loads(capsys.readouterr().out)
    assert ref["e_fci"] <= ref["e_hf"]
    assert json.loads((tmp_path / "references.json").read_text()) == ref
    assert main(["moments", "--config", H2_CONFIG, "--out", str(tmp_path)]) == 0
    assert "# exact" in capsys.readouterr().out
    assert (tmp_path / "table_exact.tsv").read_text().startswith("# energy_shift")


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
