"""
Configuration settings for the p-elastica toolkit
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from utils.curve_factory import flat_core_spec_from
from utils.curves import FlatCoreSpec
from utils.errors import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)

# Project paths
PROJECT_ROOT = Path(__file__).parent
DATA_DIR = PROJECT_ROOT / "data"
UTILS_DIR = PROJECT_ROOT / "utils"
LOGS_DIR = PROJECT_ROOT / "logs"
REPORTS_DIR = Path(os.getenv("PELASTICA_OUTPUT_DIR", str(PROJECT_ROOT / "reports")))

# Pipeline configuration
PIPELINE_CONFIG = {
    "name": "pelastica_toolkit",
    "version": "1.0.0",
    "description": "Degenerate p-elastica special functions, curves and stability probes",
    "default_output_path": str(REPORTS_DIR),
    "probe_config_path": str(UTILS_DIR / "probe_config.json"),
}

# Curve sampling
CURVE_CONFIG = {
    "samples_per_piece": 1000,
}

# Stability probe defaults, mirrored by utils/probe_config.json
PROBE_CONFIG = {
    "p": 4.0,
    "N": 1,
    "signs": "+",
    "flat_lengths": None,
    "uniform": True,
    "r": 0.6,
    "eps": 0.02,
    "slide": 0.0,
    "seeds": 20,
    "M": 400,
    "max_iter": 2000,
    "gtol": 1e-8,
    "seed": 0,
    "workers": 1,
}

# Logging configuration
LOGGING_CONFIG = {
    "level": os.getenv("PELASTICA_LOG_LEVEL", "INFO").upper(),
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "file": str(LOGS_DIR / "pelastica.log"),
}


class ProbeSettings(BaseModel):
    """Validated probe configuration: either explicit flat lengths or uniform ones from r."""

    model_config = ConfigDict(extra="forbid")

    p: float = Field(gt=2.0)
    N: int = Field(ge=1)
    signs: Union[str, List[Union[str, int]]]
    flat_lengths: Optional[List[float]] = None
    uniform: bool = True
    r: Optional[float] = None
    eps: float = Field(ge=0.0)
    slide: float = Field(0.0, ge=0.0, lt=0.5)
    seeds: int = Field(ge=1)
    M: int = Field(ge=3)
    max_iter: int = Field(ge=0)
    gtol: float = Field(gt=0.0)
    seed: int = 0
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _lengths_or_ratio(self) -> "ProbeSettings":
        if self.flat_lengths is None and self.r is None:
            raise ValueError("give either flat_lengths or r")
        if self.flat_lengths is None and not self.uniform:
            raise ValueError("flat_lengths are required when uniform is false")
        return self

    def flat_core_spec(self) -> FlatCoreSpec:
        """Explicit flat lengths win; otherwise equal lengths from r."""
        try:
            return flat_core_spec_from(self.model_dump())
        except ValidationError as e:
            raise ConfigError(f"invalid flat-core configuration: {e}") from e


def default_output_dir() -> Path:
    """Output directory, honouring PELASTICA_OUTPUT_DIR at call time"""
    return Path(os.getenv("PELASTICA_OUTPUT_DIR", str(REPORTS_DIR)))


def get_config() -> Dict[str, Any]:
    """Get all configuration settings"""
    return {
        "pipeline": PIPELINE_CONFIG,
        "curve": CURVE_CONFIG,
        "probe": PROBE_CONFIG,
        "logging": LOGGING_CONFIG,
    }


def validate_config() -> bool:
    """Validate configuration settings"""
    if LOGGING_CONFIG["level"] not in ("DEBUG", "INFO", "WARNING", "ERROR"):
        logger.warning(f"PELASTICA_LOG_LEVEL={LOGGING_CONFIG['level']} is not a known level")
        return False
    try:
        ProbeSettings(**PROBE_CONFIG)
    except ValidationError as e:
        logger.warning(f"Default probe configuration is invalid: {e}")
        return False
    return True


def load_probe_defaults(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Load probe defaults from JSON, creating the file from PROBE_CONFIG when absent"""
    config_path = Path(config_path or PIPELINE_CONFIG["probe_config_path"])
    try:
        if config_path.exists():
            with open(config_path, "r") as f:
                defaults = {**PROBE_CONFIG, **json.load(f)}
                logger.info(f"Loaded probe defaults from {config_path}")
        else:
            defaults = dict(PROBE_CONFIG)
            logger.info("Using built-in probe defaults")

            config_path.parent.mkdir(parents=True, exist_ok=True)
            with open(config_path, "w") as f:
                json.dump(PROBE_CONFIG, f, indent=2)
                logger.info(f"Created default probe configuration at {config_path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"probe configuration {config_path} is not valid JSON: {e}") from e
    except OSError as e:
        logger.error(f"Error reading probe configuration: {e}")
        defaults = dict(PROBE_CONFIG)
    return defaults


def load_probe_settings(config_path: Optional[str] = None,
                        overrides: Optional[Dict[str, Any]] = None,
                        defaults_path: Optional[str] = None) -> ProbeSettings:
    """Defaults, then the user's JSON file, then explicit overrides."""
    merged = load_probe_defaults(defaults_path)
    if config_path is not None:
        try:
            with open(config_path, "r") as f:
                merged.update(json.load(f))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read probe configuration {config_path}: {e}") from e
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if "r" in overrides and "flat_lengths" not in overrides:
        merged["flat_lengths"] = None
    merged.update(overrides)
    try:
        return ProbeSettings(**merged)
    except ValidationError as e:
        raise ConfigError(f"invalid probe configuration: {e}") from e
