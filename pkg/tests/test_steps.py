import json

import pytest

pytest.importorskip("zenml")

from steps.curve_step import build_curve  # noqa: E402
from steps.identity_check_step import run_identity_checks  # noqa: E402
from steps.probe_step import load_probe_configuration, run_stability_probe  # noqa: E402
from steps.report_step import generate_probe_report, generate_verification_report  # noqa: E402


def test_curve_step_summary():
    summary = build_curve.entrypoint(parameters={"family": "loop", "p": 4.0}, samples=100)
    assert summary["samples"] == 101
    assert summary["pieces"][0]["kind"] == "loop"
    assert summary["energy"] > 0.0


def test_verification_steps_write_reports(tmp_path):
    results = run_identity_checks.entrypoint(checks=["beta_oracle"])
    assert results["suite_status"] == "pass"
    written = generate_verification_report.entrypoint(suite_results=results, output_path=str(tmp_path))
    assert json.loads(open(written["json"]).read())["passed"] == 1
    assert (tmp_path / "verify.csv").exists()


def test_probe_steps_write_reports(tmp_path):
    settings = load_probe_configuration.entrypoint(
        overrides={"seeds": 2, "M": 60, "max_iter": 50, "eps": 0.02})
    assert settings["seeds"] == 2
    results = run_stability_probe.entrypoint(settings=settings)
    assert set(results["trajectories"]) == {"0", "1"}

    summary = build_curve.entrypoint(parameters=settings, family="flatcore", samples=100)
    written = generate_probe_report.entrypoint(
        probe_results=results,
        curve_summary=summary,
        output_path=str(tmp_path / "reports"),
        trajectories_path=str(tmp_path / "traj"),
    )
    report = json.loads(open(written["json"]).read())
    assert report["curve"]["construction"]["family"] == "flatcore"
    assert len(list((tmp_path / "traj").iterdir())) == 2
