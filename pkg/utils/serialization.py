"""
CSV and JSON writers for curves, reports and descent trajectories.

All floats are written with 17 significant digits so that fixtures
round-trip exactly, and JSON keys are sorted so identical inputs give
byte-identical files.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from utils.curves import ArcCurve, bending_energy

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"
CURVE_FIELDS = ["s", "x", "y", "theta", "kappa"]
TRAJECTORY_FIELDS = ["iteration", "energy", "bound_slack", "bound_ok"]


def format_float(value: float) -> str:
    return format(float(value), FLOAT_FORMAT)


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(by_alias=True))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if not math.isfinite(value):
            return None
        # 17 significant digits, parsed back so json writes a number
        return float(format_float(value))
    return value


def write_json(payload: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as json_file:
        json.dump(to_jsonable(payload), json_file, indent=2, sort_keys=True)
        json_file.write("\n")
    logger.info(f"JSON saved to {path}")
    return path


def curve_metadata(curve: ArcCurve) -> Dict[str, Any]:
    return {
        "p": curve.p,
        "length": curve.length,
        "samples": len(curve.s),
        "energy": bending_energy(curve) if curve.p is not None else 0.0,
        "start": [curve.x[0], curve.y[0]],
        "end": [curve.x[-1], curve.y[-1]],
        "pieces": [
            {"kind": piece.kind, "start": piece.start, "stop": piece.stop, "sign": piece.sign}
            for piece in curve.pieces
        ],
        "construction": curve.construction,
    }


def write_curve_csv(curve: ArcCurve, path: Union[str, Path]) -> Path:
    """One row per sample: s, x, y, theta, kappa."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as csvfile:
        writer = csv.DictWriter(csvfile, fieldnames=CURVE_FIELDS, lineterminator="\n")
        writer.writeheader()
        for s, x, y, theta, kappa in zip(curve.s, curve.x, curve.y, curve.theta, curve.kappa):
            writer.writerow({
                "s": format_float(s),
                "x": format_float(x),
                "y": format_float(y),
                "theta": format_float(theta),
                "kappa": format_float(kappa),
            })
    logger.info(f"Curve CSV with {len(curve.s)} rows saved to {path}")
    return path


def write_curve_json(curve: ArcCurve, path: Union[str, Path], extra: Optional[Dict[str, Any]] = None) -> Path:
    payload = {"metadata": curve_metadata(curve), **{name: getattr(curve, name) for name in CURVE_FIELDS}}
    if extra:
        payload.update(extra)
    return write_json(payload, path)


def write_rows_csv(rows: Iterable[Dict[str, Any]], fieldnames: Sequence[str], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as csvfile:
        writer = csv.DictWriter(csvfile, fieldnames=list(fieldnames), lineterminator="\n",
                                extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({
                key: format_float(value) if isinstance(value, (float, np.floating)) else value
                for key, value in row.items()
            })
    logger.info(f"CSV saved to {path}")
    return path


def write_trajectory_csv(history: Sequence[float], bound_samples: Sequence, path: Union[str, Path]) -> Path:
    """Energy per accepted iterate, with the bound slack where a partition existed.

    ``bound_samples`` holds one (slack, ok) pair per accepted iterate, or is
    empty when bound tracking was off.
    """
    rows = []
    for iteration, energy in enumerate(history):
        row = {"iteration": iteration, "energy": energy, "bound_slack": "", "bound_ok": ""}
        if 0 < iteration <= len(bound_samples):
            slack, ok = bound_samples[iteration - 1]
            row["bound_slack"] = "" if slack is None else slack
            row["bound_ok"] = "" if ok is None else str(bool(ok)).lower()
        rows.append(row)
    return write_rows_csv(rows, TRAJECTORY_FIELDS, path)


SUITE_FIELDS = ["check", "status", "message"]
PROBE_FIELDS = ["seed", "E_final", "sup_dev", "iterations", "status"]


def write_suite_csv(results: Dict[str, Any], path: Union[str, Path]) -> Path:
    rows = [
        {"check": name, "status": result.get("status", ""), "message": result.get("message", "")}
        for name, result in results.get("checks", {}).items()
    ]
    return write_rows_csv(rows, SUITE_FIELDS, path)


def write_probe_csv(report: Dict[str, Any], path: Union[str, Path]) -> Path:
    return write_rows_csv(report.get("seeds", []), PROBE_FIELDS, path)


def write_trajectories(trajectories: Dict[str, Dict[str, Any]], directory: Union[str, Path]) -> List[Path]:
    """One ``seed_<n>.csv`` per seed with the energy and bound history."""
    directory = Path(directory)
    return [
        write_trajectory_csv(data["history"], data.get("bound_samples", []), directory / f"seed_{seed}.csv")
        for seed, data in trajectories.items()
    ]
