from typing import List, Optional

from fastapi import APIRouter, HTTPException, Query, status

from app.core.exceptions import (
    CapacityError,
    DecoderToolkitError,
    OverheadRangeError,
    ParameterError,
)
from app.core.logging import logger
from app.schemas.analysis import CnotInfidelity, OverheadFamily, OverheadSolution, ZDistanceRow
from app.services.codes import CodeFamily
from app.services.fragility import z_distance_scan
from app.services.noise import cnot_infidelity
from app.services.overhead import DEFAULT_TARGET, solve_overhead

router = APIRouter(prefix="/analysis", tags=["analysis"])

# z-distance requests above this size would block the server on kernel enumeration
MAX_ZDIST_L = 19


def _translate(e: DecoderToolkitError, action: str) -> HTTPException:
    if isinstance(e, (ParameterError, OverheadRangeError, CapacityError)):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    logger.error(f"Error {action}: {e}")
    return HTTPException(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        detail=f"Error {action}: {str(e)}"
    )


@router.get("/cnot-infidelity", response_model=CnotInfidelity)
async def get_cnot_infidelity(
    p: float = Query(..., ge=0.0, le=1.0),
    eta: float = Query(1.0, ge=1.0),
):
    """Two-qubit gate infidelity (1/5 + 4/(5 eta)) p of the biased noise model."""
    try:
        return CnotInfidelity(p=p, eta=eta, p_cx=cnot_infidelity(p, eta))
    except DecoderToolkitError as e:
        raise _translate(e, "computing CNOT infidelity")


@router.get("/overhead", response_model=OverheadSolution)
async def get_overhead(
    family: OverheadFamily = OverheadFamily.XY,
    p_cx: Optional[float] = Query(None, gt=0.0, lt=1.0, description="CNOT infidelity"),
    p: Optional[float] = Query(None, gt=0.0, lt=1.0, description="Noise strength"),
    target: float = Query(DEFAULT_TARGET, gt=0.0, lt=1.0),
    eta: Optional[float] = Query(None, ge=1.0),
):
    """
    Smallest layout reaching a target logical error rate, using the bundled
    reference ansatz coefficients.

    - **family**: xy, square or rectangular
    - **p_cx** or **p**: exactly one noise strength
    """
    try:
        return solve_overhead(family, p=p, p_cx=p_cx, target=target, eta=eta)
    except DecoderToolkitError as e:
        raise _translate(e, "solving overhead")


@router.get("/z-distance", response_model=List[ZDistanceRow])
async def get_z_distance(
    L_max: int = Query(..., ge=3, le=MAX_ZDIST_L),
    L_min: int = Query(3, ge=3),
    family: CodeFamily = CodeFamily.XY_DEFORMED,
):
    """Z-type distance and d_Z / n for odd L in [L_min, L_max]."""
    try:
        return z_distance_scan(L_max, L_min, family)
    except DecoderToolkitError as e:
        raise _translate(e, "scanning Z distance")
