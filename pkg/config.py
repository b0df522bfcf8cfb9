import os
from dotenv import load_dotenv

load_dotenv()  # Load from .env if available


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"Environment variable {name} must be an integer, got {raw!r}")


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise RuntimeError(f"Environment variable {name} must be a number, got {raw!r}")


# Grid resolution: cells across the octagon's vertex diameter
GRID_CELLS = _int_env("LAB_GRID_CELLS", 200)
if GRID_CELLS < 20:
    raise RuntimeError("LAB_GRID_CELLS must be at least 20")

# Outputs
OUTPUT_DIR = os.getenv("LAB_OUTPUT_DIR", "lab_output")

# Parallel workers for per-class minimisations
WORKERS = _int_env("LAB_WORKERS", 1)

# Default seed threading all stochastic stages
SEED = _int_env("LAB_SEED", 20240601)

# Universal product constant sys * h <= C (not given numerically anywhere)
SABOURAU_C = _float_env("LAB_SABOURAU_C", 1.0)
if SABOURAU_C <= 0:
    raise RuntimeError("LAB_SABOURAU_C must be positive")

# Length cap for the second curve in collar_probe
COLLAR_L = _float_env("LAB_COLLAR_L", 8.0)

LOG_LEVEL = os.getenv("LAB_LOG_LEVEL", "INFO")
