"""
Steps package for the p-elastica toolkit
"""

from .curve_step import build_curve
from .identity_check_step import run_identity_checks
from .probe_step import load_probe_configuration, run_stability_probe
from .report_step import generate_probe_report, generate_verification_report

__all__ = [
    "build_curve",
    "run_identity_checks",
    "load_probe_configuration",
    "run_stability_probe",
    "generate_probe_report",
    "generate_verification_report",
]
