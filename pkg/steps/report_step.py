"""
Report Generation Step

This step writes identity-suite and stability-probe results as JSON and
CSV reports, plus per-seed descent trajectories when requested.
"""

from pathlib import Path
from typing import Any, Dict, Optional

from zenml import step
from zenml.logger import get_logger

from utils.serialization import (
    write_json,
    write_probe_csv,
    write_suite_csv,
    write_trajectories,
)

logger = get_logger(__name__)


@step
def generate_verification_report(
    suite_results: Dict[str, Any],
    output_path: str = "reports/"
) -> Dict[str, str]:
    """
    Generate identity-suite reports

    Args:
        suite_results: Output of the identity check step
        output_path: Directory for the generated reports

    Returns:
        Paths of the written files
    """

    logger.info("Generating verification reports...")
    Path(output_path).mkdir(parents=True, exist_ok=True)

    json_report_path = write_json(suite_results, Path(output_path) / "verify.json")
    csv_report_path = write_suite_csv(suite_results, Path(output_path) / "verify.csv")

    logger.info(f"Verification: {suite_results['passed']} passed, {suite_results['failed']} failed")
    return {"json": str(json_report_path), "csv": str(csv_report_path)}


@step
def generate_probe_report(
    probe_results: Dict[str, Any],
    curve_summary: Dict[str, Any],
    output_path: str = "reports/",
    trajectories_path: Optional[str] = None
) -> Dict[str, str]:
    """
    Generate stability-probe reports

    Args:
        probe_results: Output of the probe step
        curve_summary: Summary of the probed curve
        output_path: Directory for the generated reports
        trajectories_path: Optional directory for per-seed trajectory CSVs

    Returns:
        Paths of the written files
    """

    logger.info("Generating probe reports...")
    Path(output_path).mkdir(parents=True, exist_ok=True)

    report = probe_results["report"]
    json_report_path = write_json({**report, "curve": curve_summary}, Path(output_path) / "probe.json")
    csv_report_path = write_probe_csv(report, Path(output_path) / "probe.csv")
    written = {"json": str(json_report_path), "csv": str(csv_report_path)}

    if trajectories_path:
        files = write_trajectories(probe_results["trajectories"], trajectories_path)
        logger.info(f"Saved {len(files)} trajectory files to {trajectories_path}")
        written["trajectories"] = str(trajectories_path)

    logger.info(f"Probe verdict: {report['verdict']}")
    return written
