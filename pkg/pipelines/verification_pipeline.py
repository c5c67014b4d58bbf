"""
Verification Pipeline

This pipeline runs the identity suite and writes its reports:
1. Run the closed-form identity checks
2. Generate JSON and CSV reports
"""

import os
import sys
from pathlib import Path
from typing import List, Optional

# Add the parent directory to the Python path
parent_dir = Path(__file__).parent.parent
sys.path.insert(0, str(parent_dir))

from zenml import pipeline
from steps.identity_check_step import run_identity_checks
from steps.report_step import generate_verification_report


@pipeline
def verification_pipeline(
    output_path: str = "reports/",
    checks: Optional[List[str]] = None
):
    """
    Identity suite pipeline

    Args:
        output_path: Directory for the reports
        checks: Names of the checks to run (all when omitted)
    """

    suite_results = run_identity_checks(checks=checks)
    return generate_verification_report(suite_results=suite_results, output_path=output_path)


if __name__ == "__main__":
    os.chdir(parent_dir)

    print("🚀 Running verification pipeline directly...")
    print("=" * 60)

    try:
        result = verification_pipeline()
        print("\n✅ Pipeline executed successfully!")
        print(f"📝 Pipeline Run ID: {result.id}")
        print(f"📈 Pipeline Status: {result.status}")
    except Exception as e:
        print(f"\n❌ Pipeline failed with error: {e}")
        import traceback
        traceback.print_exc()
