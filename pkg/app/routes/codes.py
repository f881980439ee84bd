from typing import Optional

from fastapi import APIRouter, HTTPException, Query, status

from app.core.exceptions import DecoderToolkitError, ParameterError
from app.core.logging import logger
from app.schemas.code import CodeLayoutResponse
from app.services.codes import CodeFamily, build_layout, export_layout

router = APIRouter(prefix="/codes", tags=["codes"])


@router.get("/{family}", response_model=CodeLayoutResponse)
async def get_code_layout(
    family: CodeFamily,
    d_x: int = Query(..., ge=3, description="Logical-X distance, or L for XY families"),
    d_z: Optional[int] = Query(None, ge=3, description="Logical-Z distance (CSS only)"),
):
    """
    Export a surface-code layout.

    - **family**: css, xy or xy-deformed
    - **d_x**: odd size along the logical-X direction
    - **d_z**: odd size along the logical-Z direction; defaults to d_x
    """
    try:
        return export_layout(build_layout(family, d_x, d_z))
    except ParameterError as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except DecoderToolkitError as e:
        logger.error(f"Error building {family.value} layout: {e}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Error building layout: {str(e)}"
        )
