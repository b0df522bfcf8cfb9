from pydantic import BaseModel, validator
from typing import List, Optional, Dict, Any
from dataclasses import dataclass, field
from enum import Enum
import math

# ============================================================================
# LAB MODELS - shared enums, report models and exceptions
# ============================================================================

# --- Enums ---

class Background(str, Enum):
    """Reference metric a conformal factor is measured against"""
    HYPERBOLIC = "hyperbolic"   # sigma on the octagon, K = -1
    FLAT = "flat"               # |dz|^2 on the unit-disk chart


class BoundTheorem(str, Enum):
    NONPOSITIVE = "nonpositive"
    NOFOCAL = "nofocal"


class ModulusMethod(str, Enum):
    DIRICHLET = "dirichlet"
    FLAT_FORMULA = "flat-formula"
    BOUND = "bound"


class EntropyMethod(str, Enum):
    RICCATI = "riccati"
    COUNTING = "counting"


# --- Exceptions ---

class LabError(Exception):
    """Base class for every error raised by the lab"""
    pass


class LabInputError(LabError, ValueError):
    """Invalid input or violated call contract"""
    pass


class LabRangeError(LabError):
    """Point beyond numeric reach of the domain orbit"""
    pass


class LabDomainError(LabError):
    """Evaluation inside a cone-exclusion zone or unsupported cone location"""
    pass


class NumericConvergenceError(LabError):
    """Solver or minimiser failed; keeps the residual and the best iterate"""

    def __init__(self, message: str, residual: float = float("nan"), best: Any = None):
        super().__init__(message)
        self.residual = residual
        self.best = best


class VerificationFailure(LabError):
    """A checked inequality came out the wrong way"""
    pass


# -------------------------------
# Bound Models
# -------------------------------

class BoundInputs(BaseModel):
    """Inputs of the explicit systole constants"""
    chi: int = -2
    A: float = 4 * math.pi
    E: float = 1.0277
    eps: float = 0.0
    Cpos: float = 0.0
    C2: float = 0.0
    s: Optional[int] = None

    @validator('chi')
    def validate_chi(cls, v):
        if v >= 0:
            raise ValueError("Euler characteristic must be negative")
        return v

    @validator('A')
    def validate_area(cls, v):
        if not v > 0 or not math.isfinite(v):
            raise ValueError("Area must be positive and finite")
        return v

    @validator('E')
    def validate_E(cls, v):
        if not v > 0:
            raise ValueError("E must be positive")
        return v

    @validator('eps', 'Cpos', 'C2')
    def validate_nonnegative(cls, v):
        if v < 0:
            raise ValueError("Curvature margins must be non-negative")
        return v

    @validator('s', always=True)
    def default_iterations(cls, v, values):
        if v is None:
            return 2 - values.get('chi', -2)
        if v < 1:
            raise ValueError("Iteration count must be at least 1")
        return v


class BoundReport(BaseModel):
    """Evaluated constants; every large quantity kept as a natural log"""
    theorem: BoundTheorem
    ln_C: float
    C: float
    ln_R: float
    ln_R_hat: float
    ln_P: float
    ln_Q: float
    s: int
    E: float
    E_provenance: str = "supplied"
    A: float
    chi: int
    eps: Optional[float] = None
    ln_K1: Optional[float] = None
    ln_C3: Optional[float] = None
    steps: List[str] = []


class EntropyBoundReport(BaseModel):
    theorem: BoundTheorem
    sabourau_C: float
    ln_C: float
    ln_B: float
    B: float


class VerdictRow(BaseModel):
    """One metric of verify_systole_bound"""
    metric: str
    systole: Optional[float] = None
    C: float
    margin: Optional[float] = None
    passed: Optional[bool] = None
    certified: Optional[bool] = None
    excluded: bool = False
    reason: Optional[str] = None


# -------------------------------
# Estimate Models
# -------------------------------

class ModulusEstimate(BaseModel):
    value: float
    method: ModulusMethod
    residual: float = 0.0

    @validator('value')
    def validate_value(cls, v):
        if not v > 0:
            raise ValueError("Modulus must be positive")
        return v


class EntropyEstimate(BaseModel):
    """
    value is the primary estimate. For counting it is ln li^-1(2N(L)) / L,
    the prime-geodesic corrected rate; raw holds the plain ln N(L) / L.
    Flow methods leave raw unset.
    """
    value: float
    raw: Optional[float] = None
    stderr: float
    samples: int
    horizon: float
    burn_in: float = 0.0
    method: EntropyMethod
    reseeds: int = 0
    discarded: int = 0
    truncated: bool = False
    details: Dict[str, Any] = {}

    @validator('value')
    def validate_value(cls, v):
        if v < 0:
            raise ValueError("Entropy estimate cannot be negative")
        return v


class EntropyOrderReport(BaseModel):
    """Metric entropy, the area term and topological entropy side by side"""
    metric: str
    area: float
    h_metr: float
    h_metr_stderr: float
    middle: float
    h_top: float
    h_top_stderr: float
    mode: str
    passed: bool
    details: Dict[str, Any] = {}

    @validator('mode')
    def validate_mode(cls, v):
        if v not in ("equality", "strict"):
            raise ValueError(f"Unknown ordering mode {v}")
        return v


class SystoleResult(BaseModel):
    length: float
    word: List[int]
    certified: bool
    simple_length: Optional[float] = None
    simple_word: Optional[List[int]] = None
    ratio_min: float = 1.0
    candidates: int = 0


# --- Core Data Models ---

@dataclass
class TableRow:
    """Generic comparison-table row; `values` keeps column order for CSV output"""
    key: str
    values: Dict[str, Any] = field(default_factory=dict)
