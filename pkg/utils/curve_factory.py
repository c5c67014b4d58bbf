"""
Build any supported curve family from a flat parameter map, as given on the
command line or in a pipeline step.
"""

import logging
from typing import Any, Dict

from utils import pelliptic
from utils.curves import (
    ArcCurve,
    DEFAULT_SAMPLES,
    FlatCoreSpec,
    build_flat_core,
    mirror_hooked,
    ratio_for_flat_lengths,
    sample_half_loop,
    sample_loop,
    sample_segment,
    sample_wavelike,
)
from utils.errors import ConfigError
from utils.hooked import HookedProblem, build_hooked, make_branch

logger = logging.getLogger(__name__)

FAMILIES = ("wavelike", "loop", "half_loop", "segment", "flatcore", "hooked")


def _require(params: Dict[str, Any], *names: str) -> None:
    missing = [name for name in names if params.get(name) is None]
    if missing:
        raise ConfigError(f"{params.get('family')} curves need {', '.join(missing)}")


def flat_core_spec_from(params: Dict[str, Any]) -> FlatCoreSpec:
    _require(params, "p", "N", "signs")
    p, N = float(params["p"]), int(params["N"])
    if params.get("flat_lengths") is not None:
        lengths = [float(v) for v in params["flat_lengths"]]
        return FlatCoreSpec(p=p, N=N, signs=params["signs"], flat_lengths=lengths,
                            r=ratio_for_flat_lengths(p, N, lengths))
    _require(params, "r")
    return FlatCoreSpec.uniform(p=p, N=N, signs=params["signs"], r=float(params["r"]))


def build_curve_from_parameters(params: Dict[str, Any]) -> ArcCurve:
    """Dispatch on ``params["family"]``; missing parameters raise ConfigError."""
    family = params.get("family")
    M = int(params.get("M") or DEFAULT_SAMPLES)
    if family not in FAMILIES:
        raise ConfigError(f"unknown curve family {family!r}; expected one of {FAMILIES}")
    logger.info(f"Building {family} curve")

    if family == "wavelike":
        _require(params, "p", "q")
        p, q = float(params["p"]), float(params["q"])
        s_lo = float(params.get("s_lo") or 0.0)
        s_hi = params.get("s_hi")
        s_hi = float(s_hi) if s_hi is not None else s_lo + 4.0 * pelliptic.K1p(p, q)
        return sample_wavelike(p, q, s_lo, s_hi, M)
    if family in ("loop", "half_loop"):
        _require(params, "p")
        sampler = sample_loop if family == "loop" else sample_half_loop
        return sampler(float(params["p"]), params.get("sign") or "+", M)
    if family == "segment":
        _require(params, "L")
        return sample_segment(float(params["L"]), M, p=params.get("p"))
    if family == "flatcore":
        return build_flat_core(flat_core_spec_from(params), M)

    _require(params, "p", "ell", "L")
    prob = HookedProblem(p=float(params["p"]), ell=float(params["ell"]), L=float(params["L"]))
    curve = build_hooked(prob, make_branch(prob, int(params.get("n") or 1), signs=params.get("signs")), M)
    return mirror_hooked(curve) if params.get("mirrored") else curve
