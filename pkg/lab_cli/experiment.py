# ============================================================================
# lab_cli/experiment.py - Flat key = value experiment configuration
# ============================================================================
# Example:
#   schema_version = bolza-lab/1
#   family = smoothing
#   ks = 2, 4, 8, 16
#   entropy_n = 200
#
# Blank lines and lines starting with '#' are ignored. Unknown keys and a
# schema_version other than SCHEMA_VERSION are rejected.
# ============================================================================

import logging
import math
from pathlib import Path
from typing import List, Union

from pydantic import BaseModel, ValidationError, validator

import config
from models import LabInputError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "bolza-lab/1"
FAMILIES = ("hyperbolic", "flat-cone", "smoothing", "eps-curved", "bumps")
LIST_KEYS = {"ks"}


class ExperimentConfig(BaseModel):
    schema_version: str = SCHEMA_VERSION
    surface: str = "bolza"
    cells: int = config.GRID_CELLS
    area: float = 4 * math.pi
    family: str = "hyperbolic"
    ks: List[int] = [2, 4, 8, 16]
    eps: float = 0.05
    bumps: int = 3
    entropy_n: int = 200
    entropy_T: float = 50.0
    counting_L: float = 8.0
    max_word_len: int = 1
    seed: int = config.SEED
    output_dir: str = config.OUTPUT_DIR

    @validator('schema_version')
    def validate_schema(cls, v):
        if v != SCHEMA_VERSION:
            raise ValueError(f"schema_version {v!r} does not match {SCHEMA_VERSION!r}")
        return v

    @validator('surface')
    def validate_surface(cls, v):
        if v != "bolza":
            raise ValueError(f"Unsupported surface {v!r}")
        return v

    @validator('family')
    def validate_family(cls, v):
        if v not in FAMILIES:
            raise ValueError(f"family must be one of {', '.join(FAMILIES)}")
        return v

    @validator('cells')
    def validate_cells(cls, v):
        if v < 20:
            raise ValueError("cells must be at least 20")
        return v

    @validator('area', 'entropy_T', 'counting_L')
    def validate_positive(cls, v):
        if not v > 0:
            raise ValueError("must be positive")
        return v

    @validator('ks', each_item=True)
    def validate_k(cls, v):
        if v < 1:
            raise ValueError("smoothing indices must be positive")
        return v

    @validator('entropy_n', 'bumps')
    def validate_count(cls, v):
        if v < 0:
            raise ValueError("counts cannot be negative")
        return v

    @validator('max_word_len')
    def validate_word_len(cls, v):
        if v < 1:
            raise ValueError("max_word_len must be at least 1")
        return v


def parse_config_text(text: str) -> ExperimentConfig:
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise LabInputError(f"Config line {number}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in ExperimentConfig.__fields__:
            raise LabInputError(f"Config line {number}: unknown key {key!r}")
        if key in values:
            raise LabInputError(f"Config line {number}: duplicate key {key!r}")
        if key in LIST_KEYS:
            values[key] = [item.strip() for item in raw.split(",") if item.strip()]
        else:
            values[key] = raw
    if "schema_version" not in values:
        raise LabInputError("Config is missing schema_version")
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        raise LabInputError(f"Invalid experiment config: {e}")


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise LabInputError(f"Config file {path} does not exist")
    cfg = parse_config_text(path.read_text())
    logger.info(f"Loaded experiment config {path} (family={cfg.family})")
    return cfg


def config_to_text(cfg: ExperimentConfig) -> str:
    lines = []
    for key, value in cfg.dict().items():
        if isinstance(value, list):
            value = ", ".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
