"""
Curve Step

This step builds a curve from a parameter map and returns a summary
(exponent, length, energy, endpoints, pieces, construction record).
"""

from typing import Any, Dict, Optional

from zenml import step
from zenml.logger import get_logger

from utils.curve_factory import build_curve_from_parameters
from utils.serialization import curve_metadata, to_jsonable

logger = get_logger(__name__)


@step
def build_curve(
    parameters: Dict[str, Any],
    family: Optional[str] = None,
    samples: Optional[int] = None
) -> Dict[str, Any]:
    """
    Build a curve and summarise it

    Args:
        parameters: Curve parameters; "family" selects wavelike, loop,
            half_loop, segment, flatcore or hooked
        family: Overrides parameters["family"]
        samples: Overrides parameters["M"] (samples per piece)

    Returns:
        Curve metadata dictionary
    """

    params = dict(parameters)
    if family is not None:
        params["family"] = family
    if samples is not None:
        params["M"] = samples

    curve = build_curve_from_parameters(params)
    summary = to_jsonable(curve_metadata(curve))
    logger.info(f"Built {params.get('family')} curve: length={summary['length']}, energy={summary['energy']}")
    return summary
