import json

import pytest

from mark0.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main, parse_seeds, ConfigError

BASE = """
[params]
n_firms = 100
[run]
warmup = 30
months = 40
horizon = 24
"""

RUN = BASE + """
[shock]
months = 3
dc_rel = 0.3
dzeta_rel = 0.1
[policy]
credit_mode = "naive"
"""

SWEEP = BASE + """
[grid]
dc_values = [0.2, 0.4]
dzeta_values = [0.0]
shock_length = 3
runs_per_cell = 2
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_seeds():
    assert parse_seeds("7") == [7]
    assert parse_seeds("2..4") == [2, 3, 4]
    with pytest.raises(ConfigError):
        parse_seeds("4..2")


def test_baseline_files_and_determinism(tmp_path):
    cfg = write(tmp_path, "b.toml", BASE)
    for d in ("o1", "o2"):
        assert main(["baseline", "--config", cfg, "--seed", "7", "--out", str(tmp_path / d)]) == EXIT_OK
    for f in ("dashboard_seed7.csv", "summary.json"):
        assert (tmp_path / "o1" / f).read_bytes() == (tmp_path / "o2" / f).read_bytes()
    head = (tmp_path / "o1" / "dashboard_seed7.csv").read_text().splitlines()[0]
    assert head == "t,output,u,pi,pi_ema,pbar,wbar,S,avg_phi,bankruptcies,rho_l,rho_d,theta,c_t,zeta_t"
    summary = json.loads((tmp_path / "o1" / "summary.json").read_text())
    assert set(summary["median"]) == {"mean_u", "annual_inflation", "mean_avg_phi"}


def test_unknown_key_is_config_error_without_output(tmp_path):
    cfg = write(tmp_path, "bad.toml", BASE + "\nbogus = 1\n")
    out = tmp_path / "never"
    assert main(["baseline", "--config", cfg, "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_bad_toml_and_missing_file(tmp_path):
    assert main(["run", "--config", write(tmp_path, "x.toml", "[[[")]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "nope.toml")]) == EXIT_CONFIG


def test_unwritable_output_is_runtime_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = write(tmp_path, "b.toml", BASE)
    assert main(["baseline", "--config", cfg, "--out", str(blocker / "sub")]) == EXIT_RUNTIME


def test_run_outputs_and_manifest_round_trip(tmp_path):
    cfg = write(tmp_path, "r.toml", RUN)
    a = tmp_path / "a"
    assert main(["run", "--config", cfg, "--seeds", "0..1", "--out", str(a)]) == EXIT_OK
    summary = json.loads((a / "summary.json").read_text())
    assert set(summary["per_seed"]) == {"0", "1"}
    assert summary["per_seed"]["0"]["shape"] in "VUWL"
    assert (a / "relative_output_seed1.csv").exists()
    b = tmp_path / "b"
    assert main(["run", "--config", str(a / "manifest.json"), "--out", str(b)]) == EXIT_OK
    for f in ("dashboard_seed0.csv", "relative_output_seed1.csv", "summary.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_run_without_shock_is_config_error(tmp_path):
    assert main(["run", "--config", write(tmp_path, "b.toml", BASE), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_sweep_and_resume(tmp_path):
    cfg = write(tmp_path, "s.toml", SWEEP)
    full, part = tmp_path / "full", tmp_path / "part"
    assert main(["sweep", "--config", cfg, "--out", str(full)]) == EXIT_OK
    assert main(["sweep", "--config", cfg, "--out", str(part), "--max-cells", "1"]) == EXIT_OK
    manifest = json.loads((part / "manifest.json").read_text())
    assert not manifest["complete"] and len(manifest["completed_cells"]) == 1
    assert main(["sweep", "--config", cfg, "--out", str(part), "--resume"]) == EXIT_OK
    assert (full / "phase_diagram.csv").read_bytes() == (part / "phase_diagram.csv").read_bytes()
    rows = (full / "phase_diagram.csv").read_text().splitlines()
    assert rows[0] == "dc_rel,dzeta_rel,T_months,n_runs,p_L,peak_u_during_mean,peak_u_after_mean"
    assert len(rows) == 3


def test_profile_sets_firm_count(tmp_path):
    cfg = write(tmp_path, "p.toml", "[run]\nwarmup = 1\nmonths = 2\n")
    out = tmp_path / "o"
    assert main(["baseline", "--config", cfg, "--profile", "desk", "--out", str(out)]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["params"]["n_firms"] == 1000
