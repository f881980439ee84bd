"""
Rotated surface-code layouts: CSS (square or rectangular), XY, and the
XY code with deformed boundaries.

Data qubit (c, r) of a d_x-wide, d_z-tall patch sits at (2c, 2r); stabilizer
ancillas sit at plaquette centres (2c+1, 2r+1). Bulk plaquettes alternate
type in a checkerboard; the top and bottom rows keep only Z-type (Y-type in XY
codes) weight-2 plaquettes and the left and right columns keep only X-type ones.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Tuple

from app.core.exceptions import ParameterError
from app.schemas.code import CodeLayoutResponse, StabilizerRow
from app.services.pauli import PauliString, conjugate_letter
from app.services.stabilizer import StabilizerCode

logger = logging.getLogger(__name__)

Coord = Tuple[int, int]

# Offsets of a data qubit from its ancilla, listed in slot order.
NW, NE, SW, SE = (-1, -1), (1, -1), (-1, 1), (1, 1)
X_TYPE_ORDER = (NW, SW, NE, SE)
ZY_TYPE_ORDER = (NW, NE, SW, SE)


class CodeFamily(str, Enum):
    CSS = "css"
    XY = "xy"
    XY_DEFORMED = "xy-deformed"


@dataclass(frozen=True)
class StabilizerDescriptor:
    """One ancilla-measured stabilizer: support in slot order with its Pauli letters."""

    ancilla: int
    coord: Coord
    kind: str
    qubits: Tuple[int, ...]
    paulis: Tuple[str, ...]
    slots: Tuple[int, ...]

    @property
    def weight(self) -> int:
        return len(self.qubits)

    @property
    def is_boundary(self) -> bool:
        return len(self.qubits) == 2

    def pauli(self, n: int) -> PauliString:
        return PauliString.from_letters(n, dict(zip(self.qubits, self.paulis)))


@dataclass(frozen=True)
class DeformationMap:
    """Single-qubit Clifford tag per data qubit: ``I``, ``H`` or ``A = HSH``."""

    tags: Tuple[Tuple[int, str], ...] = ()

    @cached_property
    def as_dict(self) -> Dict[int, str]:
        return dict(self.tags)

    def tag(self, qubit: int) -> str:
        return self.as_dict.get(qubit, "I")

    @property
    def tagged_qubits(self) -> Tuple[int, ...]:
        return tuple(q for q, t in self.tags if t != "I")

    def apply(self, pauli: PauliString) -> PauliString:
        return pauli.conjugated(self.as_dict)

    def basis(self, qubit: int, letter: str) -> str:
        """Physical basis of a data qubit whose logical-frame basis is ``letter``."""
        return conjugate_letter(letter, self.tag(qubit))


@dataclass(frozen=True)
class SurfaceCodeLayout:
    """Geometry, stabilizers and logical operators of one rotated surface-code patch."""

    family: CodeFamily
    d_x: int
    d_z: int
    data_coords: Tuple[Coord, ...]
    ancilla_coords: Tuple[Coord, ...]
    stabilizers: Tuple[StabilizerDescriptor, ...]
    logical_x: PauliString
    logical_z: PauliString
    logical_y: Optional[PauliString] = None
    deformation: Optional[DeformationMap] = field(default=None)

    @property
    def num_data(self) -> int:
        return len(self.data_coords)

    @property
    def num_qubits(self) -> int:
        return len(self.data_coords) + len(self.ancilla_coords)

    @property
    def distance(self) -> int:
        return min(self.d_x, self.d_z)

    @property
    def qubit_coords(self) -> Tuple[Coord, ...]:
        return self.data_coords + self.ancilla_coords

    @property
    def bases(self) -> Tuple[str, ...]:
        """Memory bases this family supports."""
        if self.family is CodeFamily.CSS:
            return ("X", "Z")
        return ("X", "Y")

    def logical(self, letter: str) -> PauliString:
        operator = {"X": self.logical_x, "Z": self.logical_z, "Y": self.logical_y}.get(letter)
        if operator is None:
            raise ParameterError(f"{self.family.value} code has no native logical {letter}")
        return operator

    def data_basis(self, qubit: int, letter: str) -> str:
        if self.deformation is None:
            return letter
        return self.deformation.basis(qubit, letter)

    def to_code(self) -> StabilizerCode:
        n = self.num_data
        return StabilizerCode(
            n=n,
            stabilizers=tuple(s.pauli(n) for s in self.stabilizers),
            logical_x=self.logical_x,
            logical_z=self.logical_z,
            logical_y=self.logical_y,
            coordinates=self.data_coords,
        )


def _check_dimension(name: str, value: int) -> None:
    if not isinstance(value, int) or value < 3 or value % 2 == 0:
        raise ParameterError(f"{name} must be an odd integer >= 3, got {value!r}")


def _plaquette_type(c: int, r: int) -> str:
    return "X" if (c + r) % 2 == 0 else "Z"


def _rotated_patch(d_x: int, d_z: int, second_type: str):
    """Data coordinates, ancilla coordinates and descriptors of a rotated patch.

    ``second_type`` is the letter of the non-X stabilizers ('Z' or 'Y').
    """
    data_coords = [(2 * c, 2 * r) for r in range(d_z) for c in range(d_x)]
    data_index = {coord: i for i, coord in enumerate(data_coords)}

    plaquettes: List[Tuple[int, int, str]] = []
    for r in range(-1, d_z):
        for c in range(-1, d_x):
            kind = _plaquette_type(c, r)
            on_row_edge = r in (-1, d_z - 1)
            on_col_edge = c in (-1, d_x - 1)
            if on_row_edge and on_col_edge:
                continue
            if on_row_edge and kind != "Z":
                continue
            if on_col_edge and kind != "X":
                continue
            plaquettes.append((c, r, kind))

    n = len(data_coords)
    ancilla_coords: List[Coord] = []
    descriptors: List[StabilizerDescriptor] = []
    for offset, (c, r, kind) in enumerate(plaquettes):
        centre = (2 * c + 1, 2 * r + 1)
        letter = "X" if kind == "X" else second_type
        order = X_TYPE_ORDER if kind == "X" else ZY_TYPE_ORDER
        qubits, slots = [], []
        for slot, (dx, dy) in enumerate(order):
            neighbour = (centre[0] + dx, centre[1] + dy)
            if neighbour in data_index:
                qubits.append(data_index[neighbour])
                slots.append(slot)
        ancilla_coords.append(centre)
        descriptors.append(
            StabilizerDescriptor(
                ancilla=n + offset,
                coord=centre,
                kind=letter,
                qubits=tuple(qubits),
                paulis=tuple(letter for _ in qubits),
                slots=tuple(slots),
            )
        )
    return data_coords, ancilla_coords, descriptors


def _row_logical(n: int, d_x: int, letter: str) -> PauliString:
    return PauliString.from_letters(n, {c: letter for c in range(d_x)})


def _column_logical(n: int, d_x: int, d_z: int, letter: str) -> PauliString:
    return PauliString.from_letters(n, {r * d_x: letter for r in range(d_z)})


def build_css(d_x: int, d_z: int) -> SurfaceCodeLayout:
    """
    Rotated CSS surface code with X distance ``d_x`` and Z distance ``d_z``.

    Raises:
        ParameterError: if a dimension is even or below 3
    """
    _check_dimension("d_x", d_x)
    _check_dimension("d_z", d_z)
    data, ancillas, descriptors = _rotated_patch(d_x, d_z, "Z")
    n = len(data)
    layout = SurfaceCodeLayout(
        family=CodeFamily.CSS,
        d_x=d_x,
        d_z=d_z,
        data_coords=tuple(data),
        ancilla_coords=tuple(ancillas),
        stabilizers=tuple(descriptors),
        logical_x=_row_logical(n, d_x, "X"),
        logical_z=_column_logical(n, d_x, d_z, "Z"),
    )
    logger.debug(f"Built CSS layout {d_x}x{d_z} with {layout.num_qubits} qubits")
    return layout


def build_xy(L: int) -> SurfaceCodeLayout:
    """
    XY surface code: the square CSS geometry with every Z stabilizer replaced by Y.

    Logical Z is Z on every data qubit; logical X runs along the top row and
    logical Y down the left column.
    """
    _check_dimension("L", L)
    data, ancillas, descriptors = _rotated_patch(L, L, "Y")
    n = len(data)
    layout = SurfaceCodeLayout(
        family=CodeFamily.XY,
        d_x=L,
        d_z=L,
        data_coords=tuple(data),
        ancilla_coords=tuple(ancillas),
        stabilizers=tuple(descriptors),
        logical_x=_row_logical(n, L, "X"),
        logical_z=PauliString(n, 0, (1 << n) - 1),
        logical_y=_column_logical(n, L, L, "Y"),
    )
    logger.debug(f"Built XY layout L={L} with {layout.num_qubits} qubits")
    return layout


def deformation_map(layout: SurfaceCodeLayout) -> DeformationMap:
    """H on one qubit of every boundary Y stabilizer, A on one qubit of every boundary X stabilizer.

    The tagged qubit is the support qubit with the lexicographically smaller coordinate.
    """
    tags: Dict[int, str] = {}
    for stabilizer in layout.stabilizers:
        if not stabilizer.is_boundary:
            continue
        target = min(stabilizer.qubits, key=lambda q: layout.data_coords[q])
        tag = "H" if stabilizer.kind == "Y" else "A"
        if target in tags:
            raise ParameterError(f"data qubit {target} would carry two deformation tags")
        tags[target] = tag
    return DeformationMap(tuple(sorted(tags.items())))


def deform_layout(layout: SurfaceCodeLayout, deformation: DeformationMap) -> SurfaceCodeLayout:
    """Conjugate the stabilizer letters and logicals of ``layout`` qubit-wise."""
    stabilizers = tuple(
        StabilizerDescriptor(
            ancilla=s.ancilla,
            coord=s.coord,
            kind=s.kind,
            qubits=s.qubits,
            paulis=tuple(conjugate_letter(p, deformation.tag(q)) for q, p in zip(s.qubits, s.paulis)),
            slots=s.slots,
        )
        for s in layout.stabilizers
    )
    return SurfaceCodeLayout(
        family=CodeFamily.XY_DEFORMED,
        d_x=layout.d_x,
        d_z=layout.d_z,
        data_coords=layout.data_coords,
        ancilla_coords=layout.ancilla_coords,
        stabilizers=stabilizers,
        logical_x=deformation.apply(layout.logical_x),
        logical_z=deformation.apply(layout.logical_z),
        logical_y=deformation.apply(layout.logical_y) if layout.logical_y is not None else None,
        deformation=deformation,
    )


def build_xy_deformed(L: int) -> Tuple[SurfaceCodeLayout, DeformationMap]:
    """XY code with H/A-deformed boundaries; returns the layout and its deformation map."""
    base = build_xy(L)
    deformation = deformation_map(base)
    layout = deform_layout(base, deformation)
    logger.debug(f"Built deformed XY layout L={L} with {len(deformation.tagged_qubits)} tagged qubits")
    return layout, deformation


def build_layout(family: CodeFamily | str, d_x: int, d_z: Optional[int] = None) -> SurfaceCodeLayout:
    """Dispatch on family; XY families require d_x == d_z."""
    family = CodeFamily(family)
    d_z = d_x if d_z is None else d_z
    if family is CodeFamily.CSS:
        return build_css(d_x, d_z)
    if d_x != d_z:
        raise ParameterError(f"{family.value} codes are square; got {d_x}x{d_z}")
    if family is CodeFamily.XY:
        return build_xy(d_x)
    return build_xy_deformed(d_x)[0]


def export_layout(layout: SurfaceCodeLayout) -> CodeLayoutResponse:
    """Serializable view of a layout for the CLI and the API."""
    logicals = {"X": layout.logical_x, "Z": layout.logical_z, "Y": layout.logical_y}
    return CodeLayoutResponse(
        family=layout.family.value,
        d_x=layout.d_x,
        d_z=layout.d_z,
        num_data=layout.num_data,
        num_qubits=layout.num_qubits,
        qubit_coords=list(layout.qubit_coords),
        stabilizers=[
            StabilizerRow(
                ancilla=s.ancilla,
                kind=s.kind,
                coord=s.coord,
                support=dict(zip(s.qubits, s.paulis)),
                slots=list(s.slots),
            )
            for s in layout.stabilizers
        ],
        logicals={k: str(v) for k, v in logicals.items() if v is not None},
        deformation=dict(layout.deformation.tags) if layout.deformation else {},
    )
