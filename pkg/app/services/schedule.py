"""Four-slot syndrome-extraction gate plans for rotated layouts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

from app.core.exceptions import ScheduleConflictError
from app.services.codes import CodeFamily, StabilizerDescriptor, SurfaceCodeLayout

NUM_SLOTS = 4

_CONTROLLED_GATE = {"X": "CX", "Y": "CY", "Z": "CZ"}


@dataclass(frozen=True)
class Gate:
    name: str
    control: int
    target: int

    @property
    def qubits(self) -> Tuple[int, int]:
        return (self.control, self.target)


@dataclass(frozen=True)
class GatePlan:
    """Gates of one syndrome cycle grouped by slot, plus each ancilla's prep/measure basis."""

    slots: Tuple[Tuple[Gate, ...], ...]
    ancilla_bases: Tuple[Tuple[int, str], ...]

    def ancilla_basis(self, ancilla: int) -> str:
        return dict(self.ancilla_bases)[ancilla]


def _measures_on_target(layout: SurfaceCodeLayout, stabilizer: StabilizerDescriptor) -> bool:
    """CSS Z stabilizers collect parity on a |0> ancilla targeted by data-controlled CX gates."""
    return layout.family is CodeFamily.CSS and stabilizer.kind == "Z"


def stabilizer_gates(layout: SurfaceCodeLayout, stabilizer: StabilizerDescriptor) -> List[Tuple[int, Gate]]:
    gates = []
    for qubit, letter, slot in zip(stabilizer.qubits, stabilizer.paulis, stabilizer.slots):
        if _measures_on_target(layout, stabilizer):
            gate = Gate("CX", qubit, stabilizer.ancilla)
        else:
            gate = Gate(_CONTROLLED_GATE[letter], stabilizer.ancilla, qubit)
        gates.append((slot, gate))
    return gates


def schedule(layout: SurfaceCodeLayout) -> GatePlan:
    """
    Build the per-slot gate plan of one syndrome cycle.

    X (and Y, and deformed mixed-letter) stabilizers use ancilla-controlled
    CX/CY/CZ gates from a |+> ancilla; CSS Z stabilizers use CX gates targeted
    on a |0> ancilla.

    Raises:
        ScheduleConflictError: if two gates touch one qubit in the same slot
    """
    slots: List[List[Gate]] = [[] for _ in range(NUM_SLOTS)]
    busy: List[Dict[int, Gate]] = [{} for _ in range(NUM_SLOTS)]
    bases: List[Tuple[int, str]] = []
    for stabilizer in layout.stabilizers:
        bases.append((stabilizer.ancilla, "Z" if _measures_on_target(layout, stabilizer) else "X"))
        for slot, gate in stabilizer_gates(layout, stabilizer):
            for qubit in gate.qubits:
                if qubit in busy[slot]:
                    raise ScheduleConflictError(
                        f"qubit {qubit} used by {busy[slot][qubit]} and {gate} in slot {slot}"
                    )
                busy[slot][qubit] = gate
            slots[slot].append(gate)
    return GatePlan(
        slots=tuple(tuple(sorted(s, key=lambda g: (g.control, g.target))) for s in slots),
        ancilla_bases=tuple(bases),
    )
