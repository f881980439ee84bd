from enum import Enum
from typing import Dict, List, Optional

from pydantic import Field, model_validator

from app.schemas import ResponseSchema


class AnsatzFamily(str, Enum):
    """Below-threshold ansatz families."""
    XY = "xy"
    RECT_X = "rect_x"
    RECT_Z = "rect_z"


class OverheadFamily(str, Enum):
    XY = "xy"
    SQUARE = "square"
    RECTANGULAR = "rectangular"


class ThresholdFit(ResponseSchema):
    """Critical-exponent fit f = A + Bx + Cx^2, x = (p - p_th) L^(1/nu)."""
    p_th: float = Field(..., description="Threshold in p_CX units")
    nu: float
    A: float
    B: float
    C: float
    sigma_pth: float = Field(..., ge=0.0, description="Leave-one-size-out jackknife standard error")
    sigma_nu: float = Field(0.0, ge=0.0)
    chi2_per_dof: float
    sizes: List[int]


class AnsatzFit(ResponseSchema):
    """Fitted coefficients of p_log = a (b p)^exponent, with standard errors."""
    family: AnsatzFamily
    a: float = Field(..., gt=0.0)
    b: float = Field(..., gt=0.0)
    sigma_a: float = Field(0.0, ge=0.0)
    sigma_b: float = Field(0.0, ge=0.0)
    eta: Optional[float] = Field(None, ge=1.0, description="Bias of the fitted data, for p_CX conversion")
    residual: float = Field(0.0, ge=0.0, description="Root-mean-square log residual")


class ExponentFit(ResponseSchema):
    """Slope of log p_log against log p at one size, compared with the (sqrt(n)+1)/2 scaling."""
    L: int
    n: int
    slope: float
    intercept: float
    expected_slope: float

    @property
    def relative_deviation(self) -> float:
        return abs(self.slope - self.expected_slope) / abs(self.expected_slope)


class OverheadSolution(ResponseSchema):
    """Smallest layout meeting the target, and the continuous relaxation."""
    family: OverheadFamily
    p: float = Field(..., description="Noise strength used in the ansatz")
    target: float
    d_x: int
    d_z: int
    rounds: int
    qubits: int
    aspect_ratio: float = Field(..., description="d_z / d_x of the integer solution")
    continuous_d_x: float
    continuous_d_z: float
    continuous_qubits: float
    continuous_aspect_ratio: float
    logical_error_rate: float

    @model_validator(mode='after')
    def check_qubits(self) -> "OverheadSolution":
        if self.qubits != 2 * self.d_x * self.d_z - 1:
            raise ValueError("qubits must equal 2 d_x d_z - 1")
        return self


class OverheadCurvePoint(ResponseSchema):
    p_cx: float
    qubits: Dict[OverheadFamily, Optional[int]]
    continuous_qubits: Dict[OverheadFamily, Optional[float]]


class SpamRatio(ResponseSchema):
    """Logical error rate with noisy SPAM over the rate with perfect SPAM."""
    ratio: float
    sigma: float = Field(..., ge=0.0)
    spam_failures: int = Field(..., ge=0)
    memory_failures: int = Field(..., ge=0)
    shots: int = Field(..., ge=0)


class ZDistanceRow(ResponseSchema):
    L: int
    n: int
    d_z: Optional[int]
    ratio: Optional[float] = Field(None, description="d_z / n")
    kernel_dimension: int
    z_stabilizer_count: int
    z_logical_count: int
    minimum_logicals: int = Field(..., description="Number of minimum-weight Z logicals")


class CnotInfidelity(ResponseSchema):
    p: float
    eta: float
    p_cx: float

