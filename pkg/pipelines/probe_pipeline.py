"""
Stability Probe Pipeline

This pipeline probes a flat-core pinned p-elastica:
1. Resolve the probe configuration
2. Build and summarise the flat-core curve
3. Relax, perturb and descend the discretised curve
4. Generate JSON and CSV reports (and trajectories)
"""

import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

# Add the parent directory to the Python path
parent_dir = Path(__file__).parent.parent
sys.path.insert(0, str(parent_dir))

from zenml import pipeline
from config import CURVE_CONFIG
from steps.curve_step import build_curve
from steps.probe_step import load_probe_configuration, run_stability_probe
from steps.report_step import generate_probe_report


@pipeline
def probe_pipeline(
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    output_path: str = "reports/",
    trajectories_path: Optional[str] = None
):
    """
    Stability probe pipeline

    Args:
        config_path: Optional JSON file with probe keys
        overrides: Explicit probe values that win over the file
        output_path: Directory for the reports
        trajectories_path: Optional directory for per-seed trajectory CSVs
    """

    settings = load_probe_configuration(config_path=config_path, overrides=overrides)
    curve_summary = build_curve(
        parameters=settings,
        family="flatcore",
        samples=CURVE_CONFIG["samples_per_piece"]
    )
    probe_results = run_stability_probe(settings=settings)
    return generate_probe_report(
        probe_results=probe_results,
        curve_summary=curve_summary,
        output_path=output_path,
        trajectories_path=trajectories_path
    )


if __name__ == "__main__":
    os.chdir(parent_dir)

    print("🚀 Running stability probe pipeline directly...")
    print("=" * 60)

    try:
        result = probe_pipeline()
        print("\n✅ Pipeline executed successfully!")
        print(f"📝 Pipeline Run ID: {result.id}")
        print(f"📈 Pipeline Status: {result.status}")
    except Exception as e:
        print(f"\n❌ Pipeline failed with error: {e}")
        import traceback
        traceback.print_exc()
