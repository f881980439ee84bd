"""Memory-experiment circuits: instructions, noise sites, detectors and observables."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Iterator, List, Optional, Sequence, Tuple

from app.core.exceptions import ParameterError, ScheduleConflictError
from app.services.codes import Coord, SurfaceCodeLayout
from app.services.noise import NoiseModel, Outcomes
from app.services.schedule import GatePlan, schedule

logger = logging.getLogger(__name__)

PREPARATIONS = {"PrepX": "X", "PrepY": "Y", "PrepZ": "Z"}
MEASUREMENTS = {"MeasX": "X", "MeasY": "Y", "MeasZ": "Z"}
TWO_QUBIT_GATES = ("CX", "CY", "CZ")
IDLE = "Idle"


class SpamMode(str, Enum):
    PERFECT = "perfect"
    NOISY = "noisy"


@dataclass(frozen=True)
class Instruction:
    name: str
    targets: Tuple[int, ...]
    noisy: bool = True
    flip_probability: float = 0.0

    @property
    def is_measurement(self) -> bool:
        return self.name in MEASUREMENTS


@dataclass(frozen=True)
class NoiseSite:
    """A Pauli channel with disjoint outcomes; the identity absorbs the remaining mass."""

    qubits: Tuple[int, ...]
    outcomes: Outcomes

    @property
    def total_probability(self) -> float:
        return sum(p for _, p in self.outcomes)


@dataclass(frozen=True)
class Timestep:
    instructions: Tuple[Instruction, ...]
    noise: Tuple[NoiseSite, ...] = ()


@dataclass(frozen=True)
class Circuit:
    """Timestep-ordered circuit; detectors and observables index measurements in program order."""

    num_qubits: int
    timesteps: Tuple[Timestep, ...]
    detectors: Tuple[Tuple[int, ...], ...]
    observables: Tuple[Tuple[int, ...], ...]
    qubit_coords: Tuple[Coord, ...] = ()
    detector_coords: Tuple[Tuple[int, int, int], ...] = ()

    @cached_property
    def num_measurements(self) -> int:
        return sum(1 for ts in self.timesteps for ins in ts.instructions if ins.is_measurement)

    @property
    def num_detectors(self) -> int:
        return len(self.detectors)

    @property
    def num_observables(self) -> int:
        return len(self.observables)

    @property
    def has_noise(self) -> bool:
        return any(
            ts.noise or any(ins.flip_probability > 0 for ins in ts.instructions)
            for ts in self.timesteps
        )

    def noise_sites(self) -> Iterator[Tuple[int, NoiseSite]]:
        """Yield (timestep index, site) for every attached channel."""
        for index, ts in enumerate(self.timesteps):
            for site in ts.noise:
                yield index, site

    def validate(self) -> None:
        for index, ts in enumerate(self.timesteps):
            seen = set()
            for ins in ts.instructions:
                for q in ins.targets:
                    if q in seen:
                        raise ScheduleConflictError(f"qubit {q} appears twice in timestep {index}")
                    seen.add(q)
        limit = self.num_measurements
        for name, groups in (("detector", self.detectors), ("observable", self.observables)):
            for i, members in enumerate(groups):
                if any(not 0 <= m < limit for m in members):
                    raise ParameterError(f"{name} {i} references a measurement outside 0..{limit - 1}")

    def without_noise(self) -> "Circuit":
        timesteps = tuple(
            Timestep(tuple(replace(ins, flip_probability=0.0) for ins in ts.instructions))
            for ts in self.timesteps
        )
        return replace(self, timesteps=timesteps)

    def to_text(self) -> str:
        """Human-readable listing of timesteps, noise sites, detectors and observables."""
        lines = [f"qubits {self.num_qubits}"]
        for q, (x, y) in enumerate(self.qubit_coords):
            lines.append(f"coord {q} {x} {y}")
        measurement = 0
        for index, ts in enumerate(self.timesteps):
            lines.append(f"tick {index}")
            for ins in ts.instructions:
                head = ins.name if ins.noisy else f"{ins.name}~"
                if ins.is_measurement:
                    head = f"{head}({ins.flip_probability:.6g}) m{measurement}"
                    measurement += 1
                lines.append(f"  {head} " + " ".join(str(q) for q in ins.targets))
            for site in ts.noise:
                channel = " ".join(f"{label}={p:.6g}" for label, p in site.outcomes)
                lines.append("  noise " + " ".join(str(q) for q in site.qubits) + f" : {channel}")
        for i, members in enumerate(self.detectors):
            where = ""
            if i < len(self.detector_coords):
                where = " ({},{},{})".format(*self.detector_coords[i])
            lines.append(f"detector {i}{where} : " + " ".join(f"m{m}" for m in members))
        for k, members in enumerate(self.observables):
            lines.append(f"observable {k} : " + " ".join(f"m{m}" for m in members))
        return "\n".join(lines) + "\n"


class _CircuitBuilder:
    def __init__(self, num_qubits: int):
        self.num_qubits = num_qubits
        self.timesteps: List[Timestep] = []
        self.measurements = 0

    def add(self, instructions: Sequence[Instruction]) -> List[int]:
        """Append a timestep; returns the measurement indices it creates, in order."""
        indices = []
        for ins in instructions:
            if ins.is_measurement:
                indices.append(self.measurements)
                self.measurements += 1
        self.timesteps.append(Timestep(tuple(instructions)))
        return indices

    @staticmethod
    def idles(qubits: Sequence[int], noisy: bool) -> List[Instruction]:
        if not noisy:
            return []
        return [Instruction(IDLE, (q,)) for q in qubits]

    def syndrome_round(self, layout: SurfaceCodeLayout, plan: GatePlan, noisy: bool) -> List[int]:
        data = range(layout.num_data)
        ancillas = [s.ancilla for s in layout.stabilizers]
        bases = [plan.ancilla_basis(a) for a in ancillas]
        self.add(
            [Instruction(f"Prep{b}", (a,), noisy) for a, b in zip(ancillas, bases)]
            + self.idles(data, noisy)
        )
        for gates in plan.slots:
            busy = {q for g in gates for q in g.qubits}
            idle = [q for q in range(self.num_qubits) if q not in busy]
            self.add([Instruction(g.name, g.qubits, noisy) for g in gates] + self.idles(idle, noisy))
        return self.add(
            [Instruction(f"Meas{b}", (a,), noisy) for a, b in zip(ancillas, bases)]
            + self.idles(data, noisy)
        )


def build_memory_experiment(
    layout: SurfaceCodeLayout,
    rounds: int,
    basis: str = "X",
    spam: SpamMode | str = SpamMode.PERFECT,
) -> Circuit:
    """
    Noiseless memory-experiment circuit with noise-eligible instructions marked.

    With noisy SPAM the data preparation, every syndrome round and the final
    transversal data measurement are noisy. With perfect SPAM the noisy rounds
    are bracketed by a noiseless syndrome round on each side and the data
    preparation/measurement are noiseless.

    Raises:
        ParameterError: rounds < 1, unknown SPAM mode, or a basis the family cannot measure
    """
    if rounds < 1:
        raise ParameterError(f"rounds must be >= 1, got {rounds}")
    basis = basis.upper()
    if basis not in layout.bases:
        raise ParameterError(f"{layout.family.value} codes support memory bases {layout.bases}, got {basis!r}")
    try:
        spam = SpamMode(spam)
    except ValueError as e:
        raise ParameterError(f"unknown SPAM mode {spam!r}") from e

    plan = schedule(layout)
    builder = _CircuitBuilder(layout.num_qubits)
    noisy_spam = spam is SpamMode.NOISY
    data = list(range(layout.num_data))
    ancillas = [s.ancilla for s in layout.stabilizers]

    builder.add(
        [Instruction(f"Prep{layout.data_basis(q, basis)}", (q,), noisy_spam) for q in data]
        + builder.idles(ancillas, noisy_spam)
    )
    round_measurements: List[List[int]] = []
    if not noisy_spam:
        round_measurements.append(builder.syndrome_round(layout, plan, noisy=False))
    for _ in range(rounds):
        round_measurements.append(builder.syndrome_round(layout, plan, noisy=True))
    if not noisy_spam:
        round_measurements.append(builder.syndrome_round(layout, plan, noisy=False))
    data_measurements = builder.add(
        [Instruction(f"Meas{layout.data_basis(q, basis)}", (q,), noisy_spam) for q in data]
        + builder.idles(ancillas, noisy_spam)
    )

    detectors: List[Tuple[int, ...]] = []
    coords: List[Tuple[int, int, int]] = []
    deterministic = [s.kind == basis for s in layout.stabilizers]
    if noisy_spam:
        for s, stabilizer in enumerate(layout.stabilizers):
            if deterministic[s]:
                detectors.append((round_measurements[0][s],))
                coords.append((*stabilizer.coord, 0))
    for r in range(1, len(round_measurements)):
        for s, stabilizer in enumerate(layout.stabilizers):
            detectors.append((round_measurements[r - 1][s], round_measurements[r][s]))
            coords.append((*stabilizer.coord, r))
    last = round_measurements[-1]
    for s, stabilizer in enumerate(layout.stabilizers):
        if deterministic[s]:
            detectors.append((last[s],) + tuple(data_measurements[q] for q in stabilizer.qubits))
            coords.append((*stabilizer.coord, len(round_measurements)))

    logical = layout.logical(basis)
    observable = tuple(data_measurements[q] for q in logical.support)

    circuit = Circuit(
        num_qubits=layout.num_qubits,
        timesteps=tuple(builder.timesteps),
        detectors=tuple(detectors),
        observables=(observable,),
        qubit_coords=layout.qubit_coords,
        detector_coords=tuple(coords),
    )
    circuit.validate()
    logger.debug(
        f"Memory circuit {layout.family.value} {layout.d_x}x{layout.d_z}, {rounds} rounds, "
        f"basis {basis}, spam {spam.value}: {len(circuit.timesteps)} timesteps, {circuit.num_detectors} detectors"
    )
    return circuit


def attach_noise(circuit: Circuit, model: NoiseModel) -> Circuit:
    """Attach the channels of ``model`` after every noise-eligible instruction."""
    timesteps = []
    for ts in circuit.timesteps:
        instructions: List[Instruction] = []
        sites: List[NoiseSite] = []
        for ins in ts.instructions:
            if not ins.noisy or model.is_noiseless:
                instructions.append(replace(ins, flip_probability=0.0))
                continue
            if ins.is_measurement:
                instructions.append(replace(ins, flip_probability=model.measurement_flip(MEASUREMENTS[ins.name])))
                continue
            instructions.append(ins)
            outcomes: Optional[Outcomes] = None
            if ins.name in TWO_QUBIT_GATES:
                outcomes = model.two_qubit_channel()
            elif ins.name in PREPARATIONS:
                outcomes = model.preparation_flip(PREPARATIONS[ins.name])
            elif ins.name == IDLE:
                outcomes = model.single_qubit_channel()
            if outcomes:
                sites.append(NoiseSite(ins.targets, outcomes))
        timesteps.append(Timestep(tuple(instructions), tuple(sites)))
    return replace(circuit, timesteps=tuple(timesteps))


def memory_circuit(
    layout: SurfaceCodeLayout,
    model: NoiseModel,
    rounds: Optional[int] = None,
    basis: str = "X",
    spam: SpamMode | str = SpamMode.PERFECT,
) -> Circuit:
    """Noisy memory experiment; ``rounds`` defaults to max(d_x, d_z)."""
    rounds = max(layout.d_x, layout.d_z) if rounds is None else rounds
    return attach_noise(build_memory_experiment(layout, rounds, basis, spam), model)
