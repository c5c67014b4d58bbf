import csv
import json
import math

import pytest

import main
from main import EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_OK, parse_args, run
from utils.errors import ConfigError, IntegrationError

FLATCORE_ARGS = ["curve", "--flatcore", "--p", "4", "--N", "1", "--signs", "+", "--uniform", "--r", "0.6", "--M", "50"]


def test_special_prints_value(capsys):
    assert run(parse_args(["special", "--p", "4", "--fn", "K1p", "--q", "1"])) == EXIT_OK
    assert float(capsys.readouterr().out.strip()) == pytest.approx(2.6221, abs=1e-4)


def test_special_writes_record(tmp_path):
    out = tmp_path / "value.json"
    assert run(parse_args(["special", "--p", "2", "--fn", "E1p", "--q", "0", "--out", str(out)])) == EXIT_OK
    record = json.loads(out.read_text())
    assert record["fn"] == "E1p"
    assert record["value"] == pytest.approx(0.5 * math.pi)


def test_special_needs_its_arguments():
    assert run(parse_args(["special", "--p", "4", "--fn", "F1p", "--q", "0.5"])) == EXIT_DOMAIN


def test_divergent_integral_is_a_domain_failure():
    assert run(parse_args(["special", "--p", "2", "--fn", "K1p", "--q", "1"])) == EXIT_DOMAIN


def test_numerical_failure_exit_status(monkeypatch):
    def failing(p, q):
        raise IntegrationError("quadrature did not converge", 1.0, 0.5)

    monkeypatch.setitem(main.SPECIAL_FUNCTIONS, "K1p", (failing, ("q",)))
    assert run(parse_args(["special", "--p", "4", "--fn", "K1p", "--q", "0.5"])) == EXIT_NUMERICAL


@pytest.mark.parametrize("argv", [
    ["special", "--p", "4", "--fn", "K1p", "--bogus"],
    ["special", "--fn", "K1p"],
    ["curve", "--p", "4"],
    ["nonsense"],
])
def test_bad_command_lines_exit_with_domain_status(argv):
    with pytest.raises(ConfigError):
        parse_args(argv)
    with pytest.raises(SystemExit) as excinfo:
        main.main(argv)
    assert excinfo.value.code == EXIT_DOMAIN


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("")
    out = blocker / "curve.csv"
    assert run(parse_args(FLATCORE_ARGS + ["--out", str(out)])) == EXIT_DOMAIN


def test_probe_rejects_svg():
    assert run(parse_args(["probe", "--format", "svg"])) == EXIT_DOMAIN


def test_flat_core_curve_csv(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(parse_args(FLATCORE_ARGS + ["--out", str(first)])) == EXIT_OK
    assert run(parse_args(FLATCORE_ARGS + ["--out", str(second)])) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()

    with open(first, newline="") as f:
        rows = list(csv.DictReader(f))
    assert math.cos(float(rows[-1]["theta"])) == pytest.approx(-1.0, abs=1e-12)
    assert float(rows[-1]["kappa"]) == 0.0


def test_curve_svg_output(tmp_path):
    out = tmp_path / "core.svg"
    assert run(parse_args(FLATCORE_ARGS + ["--out", str(out)])) == EXIT_OK
    assert out.read_text().count("<path ") == 3


def test_output_directory_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("PELASTICA_OUTPUT_DIR", str(tmp_path))
    assert run(parse_args(["curve", "--loop", "--p", "3", "--M", "20"])) == EXIT_OK
    assert (tmp_path / "curve.csv").exists()


def test_hooked_report(tmp_path, capsys):
    out = tmp_path / "hooked.json"
    status = run(parse_args(["hooked", "--p", "4", "--ell", "0.6", "--L", "1", "--out", str(out)]))
    assert status == EXIT_OK
    report = json.loads(out.read_text())
    assert report["branch"] == "flatcore"
    assert report["problem"] == {"p": 4.0, "ell": 0.6, "L": 1.0}
    assert report["bc_report"]["pass"] is True
    assert "bc=pass" in capsys.readouterr().out


def test_mirrored_hooked_curve_as_csv(tmp_path):
    out = tmp_path / "hooked.csv"
    argv = ["hooked", "--p", "2", "--ell", "0.3", "--L", "1", "--mirrored", "--out", str(out)]
    assert run(parse_args(argv)) == EXIT_OK
    with open(out, newline="") as f:
        rows = list(csv.DictReader(f))
    assert abs(float(rows[-1]["kappa"])) < 1e-12


def test_verify_subset(tmp_path):
    out = tmp_path / "suite.json"
    assert run(parse_args(["verify", "--checks", "beta_oracle", "zero_set", "--out", str(out)])) == EXIT_OK
    results = json.loads(out.read_text())
    assert set(results["checks"]) == {"beta_oracle", "zero_set"}
    assert results["suite_status"] == "pass"


def test_probe_is_deterministic_for_a_seed(tmp_path):
    argv = ["probe", "--p", "4", "--N", "1", "--signs", "+", "--r", "0.6", "--eps", "0.02",
            "--seeds", "2", "--M", "60", "--max-iter", "100", "--seed", "3"]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert run(parse_args(argv + ["--out", str(first), "--trajectories", str(tmp_path / "traj")])) == EXIT_OK
    assert run(parse_args(argv + ["--out", str(second)])) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()

    report = json.loads(first.read_text())
    assert [seed["seed"] for seed in report["seeds"]] == [3, 4]
    assert sorted(p.name for p in (tmp_path / "traj").iterdir()) == ["seed_3.csv", "seed_4.csv"]
