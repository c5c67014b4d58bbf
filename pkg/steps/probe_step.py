"""
Stability Probe Steps

These steps resolve the probe configuration (defaults file, user file,
explicit overrides) and run the discrete stability probe on the resulting
flat-core curve.
"""

from typing import Any, Dict, Optional

from zenml import step
from zenml.logger import get_logger

from config import ProbeSettings, load_probe_settings
from utils.serialization import to_jsonable
from utils.stability import probe_stability

logger = get_logger(__name__)


@step
def load_probe_configuration(
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Resolve the probe configuration

    Args:
        config_path: Optional JSON file with probe keys
        overrides: Explicit values that win over the file

    Returns:
        Validated probe settings as a dictionary
    """

    settings = load_probe_settings(config_path, overrides)
    logger.info(f"Probe configuration: p={settings.p}, N={settings.N}, signs={settings.signs}, "
                f"eps={settings.eps}, slide={settings.slide}, seeds={settings.seeds}, M={settings.M}")
    return settings.model_dump()


@step
def run_stability_probe(settings: Dict[str, Any]) -> Dict[str, Any]:
    """
    Run the stability probe

    Args:
        settings: Probe settings from load_probe_configuration

    Returns:
        Probe report with per-seed outcomes, energy histories and bound samples
    """

    resolved = ProbeSettings(**settings)
    spec = resolved.flat_core_spec()
    logger.info(f"Probing flat core with flat lengths {list(spec.flat_lengths)}")

    report = probe_stability(
        spec,
        eps=resolved.eps,
        slide=resolved.slide,
        n_seeds=resolved.seeds,
        M=resolved.M,
        max_iter=resolved.max_iter,
        gtol=resolved.gtol,
        seed=resolved.seed,
        workers=resolved.workers,
    )
    logger.info(f"Verdict: {report.verdict} (E_ref={report.E_ref:.10g})")

    return {
        "report": to_jsonable(report),
        "trajectories": {
            str(outcome.seed): {
                "history": to_jsonable(outcome.history),
                "bound_samples": to_jsonable(outcome.bound_samples),
            }
            for outcome in report.seeds
        },
    }
