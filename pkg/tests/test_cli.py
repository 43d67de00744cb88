"""End-to-end checks of the command-line interface.

These run main() in-process against the bundled fixture data and assert on
exit codes, stdout fields, emitted files, and the determinism contract.
"""

import hashlib
import json
import shutil
import subprocess
import sys
from importlib.resources import files
from pathlib import Path

import pytest

from epifit.cli import main

FIXTURES = Path(str(files("epifit.fixtures")))
CONFIG = str(FIXTURES / "fixtures.toml")
CASES = str(FIXTURES / "cases_2020.csv")
DEMOGRAPHICS = str(FIXTURES / "demographics.csv")
WINDOW = "--window", "2020-06-05:2020-07-25"


def run_cli(*argv, capsys):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def data_flags(region="India"):
    return ("--cases", CASES, "--demographics", DEMOGRAPHICS,
            "--region", region, *WINDOW)


def test_version_flag(capsys):
    code, out, _ = run_cli("--version", capsys=capsys)
    assert code == 0
    assert out.startswith("epifit ")


def test_help_exits_zero(capsys):
    assert run_cli("-h", capsys=capsys)[0] == 0


def test_unknown_subcommand_is_usage_error(capsys):
    assert run_cli("bogus", capsys=capsys)[0] == 1


def test_estimate_beta_prints_fit(capsys):
    code, out, _ = run_cli("estimate-beta", *data_flags(), capsys=capsys)
    assert code == 0
    fields = dict(line.split(maxsplit=1) for line in out.strip().splitlines())
    assert fields["region"] == "India"
    assert fields["samples"] == "50"
    assert float(fields["beta_hat"]) == pytest.approx(0.1738, abs=1e-4)
    for key in ("alpha0", "alpha1", "residual_variance", "cv_error"):
        assert key in fields


def test_calibrate_with_given_beta(capsys):
    code, out, _ = run_cli(
        "calibrate", *data_flags(), "--beta", "0.1738", capsys=capsys
    )
    assert code == 0
    fields = dict(line.split(maxsplit=1) for line in out.strip().splitlines())
    assert float(fields["rho"]) == pytest.approx(0.432, abs=1e-9)
    assert float(fields["objective"]) > 0


def test_calibrate_estimates_beta_when_omitted(capsys):
    code, out, _ = run_cli("calibrate", *data_flags(), capsys=capsys)
    assert code == 0
    fields = dict(line.split(maxsplit=1) for line in out.strip().splitlines())
    assert float(fields["beta"]) == pytest.approx(0.1738, abs=1e-4)
    assert float(fields["rho"]) == pytest.approx(0.432, abs=0.005)


def test_validate_writes_both_formats(tmp_path, capsys):
    code, out, _ = run_cli(
        "validate", *data_flags(), "--beta", "0.1738", "--rho", "0.432",
        "--output-dir", str(tmp_path), capsys=capsys,
    )
    assert code == 0
    csv_path = tmp_path / "validation_india.csv"
    json_path = tmp_path / "validation_india.json"
    assert csv_path.exists() and json_path.exists()
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ("date,observed_active,predicted_active,"
                        "observed_removed,predicted_removed")
    assert len(lines) == 52
    payload = json.loads(json_path.read_text())
    assert payload["region"] == "India"
    assert payload["params"]["beta"] == 0.1738
    assert payload["mae_active"] == pytest.approx(38932.192, rel=1e-6)


@pytest.mark.parametrize("fmt,expected", [
    ("json", {"validation_india.json"}),
    ("csv", {"validation_india.csv"}),
    ("both", {"validation_india.json", "validation_india.csv"}),
])
def test_output_format_selects_files(tmp_path, capsys, fmt, expected):
    code, _, _ = run_cli(
        "validate", *data_flags(), "--beta", "0.1738", "--rho", "0.432",
        "--output-dir", str(tmp_path), "--output-format", fmt, capsys=capsys,
    )
    assert code == 0
    assert {p.name for p in tmp_path.iterdir()} == expected


def test_forecast_files_and_intervals(tmp_path, capsys):
    code, out, _ = run_cli(
        "forecast", *data_flags(), "--beta", "0.1738", "--rho", "0.432",
        "--forecast-end", "2020-09-30", "--output-dir", str(tmp_path),
        capsys=capsys,
    )
    assert code == 0
    lines = (tmp_path / "forecast_india.csv").read_text().splitlines()
    assert lines[0] == "date,susceptible,active,recovered"
    assert len(lines) == 69  # header + 67-day horizon + start day
    assert lines[1].startswith("2020-07-25,")
    payload = json.loads((tmp_path / "forecast_india.json").read_text())
    assert payload["endpoint_active"] == pytest.approx(2850000, rel=0.01)
    low95, high95 = payload["active_ci95"]
    low99, high99 = payload["active_ci99"]
    assert low99 <= low95 <= high95 <= high99


def test_forecast_requires_end_date(capsys):
    code, _, err = run_cli(
        "forecast", *data_flags(), "--beta", "0.1738", "--rho", "0.432",
        capsys=capsys,
    )
    assert code == 1
    assert "forecast_end" in err


def test_sweep_matches_reference_landmarks(tmp_path, capsys):
    code, out, _ = run_cli(
        "sweep", "--n", "1000", "--i0", "5", "--beta", "0.2",
        "--gamma", "0.0714286", "--rhos", "0,0.2,0.4,0.5,0.8,1",
        "--output-dir", str(tmp_path), capsys=capsys,
    )
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "rho,peak_infected,peak_day,die_out_day"
    assert len(lines) == 7
    rows = [line.split(",") for line in lines[1:]]
    by_rho = {float(r[0]): r for r in rows}
    assert float(by_rho[0.0][1]) > 275
    assert int(by_rho[0.2][2]) == pytest.approx(62, abs=3)
    assert int(by_rho[0.4][3]) == pytest.approx(262, abs=5)
    payload = json.loads((tmp_path / "sweep.json").read_text())
    assert [p["rho"] for p in payload["points"]] == [0, 0.2, 0.4, 0.5, 0.8, 1]


def test_sweep_blank_die_out_when_not_reached(tmp_path, capsys):
    code, _, _ = run_cli(
        "sweep", "--n", "1000", "--i0", "5", "--beta", "0.2",
        "--rhos", "0", "--horizon", "30", "--output-dir", str(tmp_path),
        "--output-format", "csv", capsys=capsys,
    )
    assert code == 0
    row = (tmp_path / "sweep.csv").read_text().splitlines()[1]
    assert row.endswith(",")  # no die-out inside the horizon


def test_pipeline_manifest_records_parameters(tmp_path, capsys):
    code, out, _ = run_cli(
        "pipeline", "--region", "India", "--config", CONFIG,
        "--output-dir", str(tmp_path), capsys=capsys,
    )
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert names == {
        "validation_india.csv", "validation_india.json",
        "forecast_india.csv", "forecast_india.json", "manifest_india.json",
    }
    manifest = json.loads((tmp_path / "manifest_india.json").read_text())
    assert manifest["estimate"]["beta_hat"] == pytest.approx(0.1738, abs=0.01)
    assert manifest["calibration"]["rho"] == pytest.approx(0.432, abs=0.02)
    assert manifest["gamma"] == pytest.approx(1 / 14)
    assert manifest["folds"] == 10
    assert manifest["population"] == 1210569573
    assert manifest["window_start"] == "2020-06-05"
    assert manifest["forecast_end"] == "2020-09-30"
    assert manifest["integrator_step_days"] == 0.1
    assert manifest["inputs"]["case_csv_sha256"] == hashlib.sha256(
        Path(CASES).read_bytes()
    ).hexdigest()
    assert sorted(manifest["artifacts"]) == [
        "forecast_india.csv", "forecast_india.json",
        "validation_india.csv", "validation_india.json",
    ]


def test_pipeline_runs_byte_identically(tmp_path, capsys):
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    for out_dir in (dir_a, dir_b):
        code, _, _ = run_cli(
            "pipeline", "--region", "Assam", "--config", CONFIG,
            "--output-dir", str(out_dir), capsys=capsys,
        )
        assert code == 0
    names_a = sorted(p.name for p in dir_a.iterdir())
    assert names_a == sorted(p.name for p in dir_b.iterdir())
    for name in names_a:
        assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes()


def test_inputs_are_never_mutated(tmp_path, capsys):
    cases = tmp_path / "cases.csv"
    demo = tmp_path / "demo.csv"
    shutil.copy(CASES, cases)
    shutil.copy(DEMOGRAPHICS, demo)
    before = cases.read_bytes(), demo.read_bytes()
    code, _, _ = run_cli(
        "pipeline", "--cases", str(cases), "--demographics", str(demo),
        "--region", "Bihar", *WINDOW, "--forecast-end", "2020-09-30",
        "--output-dir", str(tmp_path / "out"), capsys=capsys,
    )
    assert code == 0
    assert (cases.read_bytes(), demo.read_bytes()) == before


def test_output_dir_env_fallback(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("EPIFIT_OUTPUT_DIR", "from_env")
    code, _, _ = run_cli(
        "validate", *data_flags(), "--beta", "0.1738", "--rho", "0.432",
        capsys=capsys,
    )
    assert code == 0
    assert (tmp_path / "from_env" / "validation_india.json").exists()


def test_default_output_dir_is_cwd(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("EPIFIT_OUTPUT_DIR", raising=False)
    code, _, _ = run_cli(
        "validate", *data_flags(), "--beta", "0.1738", "--rho", "0.432",
        "--output-format", "json", capsys=capsys,
    )
    assert code == 0
    assert (tmp_path / "validation_india.json").exists()


def test_config_paths_resolve_relative_to_config_file(tmp_path, capsys):
    conf_dir = tmp_path / "conf"
    conf_dir.mkdir()
    shutil.copy(CASES, conf_dir / "cases.csv")
    shutil.copy(DEMOGRAPHICS, conf_dir / "demo.csv")
    (conf_dir / "run.toml").write_text(
        'case_csv_path = "cases.csv"\n'
        'demographics_csv_path = "demo.csv"\n'
        'region = "Telangana"\n'
        "window_start = 2020-06-05\n"
        "window_end = 2020-07-25\n"
    )
    monkey_out = tmp_path / "out"
    code, out, _ = run_cli(
        "estimate-beta", "--config", str(conf_dir / "run.toml"),
        "--output-dir", str(monkey_out), capsys=capsys,
    )
    assert code == 0
    assert "Telangana" in out


def test_flags_override_config(tmp_path, capsys):
    code, _, _ = run_cli(
        "pipeline", "--config", CONFIG, "--region", "Gujarat",
        "--output-dir", str(tmp_path), "--output-format", "json",
        capsys=capsys,
    )
    assert code == 0
    manifest = json.loads((tmp_path / "manifest_gujarat.json").read_text())
    assert manifest["region"] == "Gujarat"
    assert manifest["estimate"]["beta_hat"] == pytest.approx(0.1556, abs=0.01)


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('regoin = "India"\n')
    code, _, err = run_cli("estimate-beta", "--config", str(bad), capsys=capsys)
    assert code == 1
    assert "regoin" in err


def test_missing_config_file_is_usage_error(capsys):
    code, _, err = run_cli(
        "estimate-beta", "--config", "/no/such/file.toml", capsys=capsys
    )
    assert code == 1
    assert "config" in err


def test_missing_case_file_is_data_error(capsys):
    code, _, err = run_cli(
        "calibrate", "--cases", "/no/such.csv", "--demographics", DEMOGRAPHICS,
        "--region", "India", *WINDOW, capsys=capsys,
    )
    assert code == 2
    assert "case CSV" in err


def test_unknown_region_is_data_error(capsys):
    code, _, err = run_cli(
        "estimate-beta", "--cases", CASES, "--demographics", DEMOGRAPHICS,
        "--region", "Atlantis", *WINDOW, capsys=capsys,
    )
    assert code == 2
    assert "Atlantis" in err


def test_two_day_window_reports_too_few_samples(capsys):
    code, _, err = run_cli(
        "estimate-beta", "--cases", CASES, "--demographics", DEMOGRAPHICS,
        "--region", "India", "--window", "2020-06-05:2020-06-06",
        capsys=capsys,
    )
    assert code == 2
    assert "too few samples" in err


def test_inverted_window_is_usage_error(capsys):
    code, _, err = run_cli(
        "estimate-beta", *data_flags()[:6], "--window",
        "2020-07-25:2020-06-05", capsys=capsys,
    )
    assert code == 1
    assert "precedes" in err


def test_invalid_rho_flag_is_usage_error(capsys):
    code, _, err = run_cli(
        "forecast", *data_flags(), "--beta", "0.1738", "--rho", "1.5",
        "--forecast-end", "2020-09-30", capsys=capsys,
    )
    assert code == 1
    assert "rho" in err


def test_numerical_blowup_exits_three(capsys):
    code, _, err = run_cli(
        "sweep", "--n", "1000", "--i0", "5", "--beta", "80", "--gamma", "60",
        "--rhos", "0", "--step", "1.0", "--horizon", "50",
        "--output-format", "json", "--output-dir", "/tmp", capsys=capsys,
    )
    assert code == 3
    assert "integration failed" in err


def test_pipeline_error_names_failing_stage(tmp_path, capsys):
    # demographics population too small for the observed counts
    demo = tmp_path / "demo.csv"
    demo.write_text("region,population,rural_pct,density\nIndia,100000,68.84,382\n")
    code, _, err = run_cli(
        "pipeline", "--cases", CASES, "--demographics", str(demo),
        "--region", "India", *WINDOW, "--forecast-end", "2020-09-30",
        "--output-dir", str(tmp_path), capsys=capsys,
    )
    assert code == 2
    assert "estimate stage" in err


def test_console_script_is_installed():
    exe = shutil.which("epifit")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("epifit ")
