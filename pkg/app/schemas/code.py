from typing import Dict, List, Tuple

from pydantic import Field

from app.schemas import BaseSchema, ResponseSchema


class StabilizerRow(BaseSchema):
    """One measured stabilizer: ancilla, type and Pauli letter per data qubit."""
    ancilla: int
    kind: str
    coord: Tuple[int, int]
    support: Dict[int, str]
    slots: List[int] = Field(..., description="Gate slot of each support qubit, in support order")


class CodeLayoutResponse(ResponseSchema):
    """Exported geometry, stabilizers, logicals and deformation of a layout."""
    family: str
    d_x: int
    d_z: int
    num_data: int
    num_qubits: int
    qubit_coords: List[Tuple[int, int]]
    stabilizers: List[StabilizerRow]
    logicals: Dict[str, str]
    deformation: Dict[int, str] = Field(default_factory=dict)
