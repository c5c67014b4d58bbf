"""
Identity Check Step

This step runs the closed-form identity suite (periodicity, Beta oracles,
Q_p monotonicity, the |cn_p|^p integral identity, flat-core geometry,
hooked energies and Euler-Lagrange residuals).
"""

from typing import Any, Dict, List, Optional

from zenml import step
from zenml.logger import get_logger

from utils.identity_suite import run_identity_suite

logger = get_logger(__name__)


@step
def run_identity_checks(checks: Optional[List[str]] = None) -> Dict[str, Any]:
    """
    Run the identity suite

    Args:
        checks: Names of the checks to run (all when omitted)

    Returns:
        Dictionary with suite_status, pass/fail counts and per-check results
    """

    logger.info("Running identity suite...")
    results = run_identity_suite(checks)

    for name, result in results["checks"].items():
        icon = "✅" if result["status"] == "pass" else "❌"
        logger.info(f"{icon} {name}: {result['message']}")

    logger.info(f"Identity suite finished: {results['passed']} passed, {results['failed']} failed")
    return results
