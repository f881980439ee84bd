"""
Vectorized Pauli-frame propagation.

Frames are stored as two boolean arrays ``x`` and ``z`` of shape
(num_qubits, columns); a column is either one Monte Carlo shot or one injected
fault. Every circuit timestep is compiled once into grouped index arrays so a
step costs a handful of numpy fancy-index operations regardless of the number
of columns.

Within a timestep the order is: preparations, gates, measurements, then the
noise attached to that timestep's instructions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from app.services.circuit import MEASUREMENTS, PREPARATIONS, Circuit, NoiseSite

PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class Injection:
    """A deterministic fault applied to one column after timestep ``timestep``."""

    column: int
    timestep: int
    qubits: Tuple[int, ...] = ()
    label: str = ""
    measurement: Optional[int] = None


@dataclass
class _InjectionBatch:
    qubits: np.ndarray
    columns: np.ndarray
    x: np.ndarray
    z: np.ndarray
    measurements: np.ndarray
    measurement_columns: np.ndarray


def _group_injections(injections: Sequence[Injection]) -> Dict[int, _InjectionBatch]:
    """Pack faults into per-timestep index arrays; every column touches a qubit at most once."""
    pauli: Dict[int, List[Tuple[int, int, bool, bool]]] = {}
    flips: Dict[int, List[Tuple[int, int]]] = {}
    for fault in injections:
        if fault.measurement is not None:
            flips.setdefault(fault.timestep, []).append((fault.measurement, fault.column))
            continue
        rows = pauli.setdefault(fault.timestep, [])
        for q, letter in zip(fault.qubits, fault.label):
            bx, bz = PAULI_BITS[letter]
            rows.append((q, fault.column, bool(bx), bool(bz)))
    batches = {}
    for step in set(pauli) | set(flips):
        rows = pauli.get(step, [])
        measured = flips.get(step, [])
        batches[step] = _InjectionBatch(
            qubits=np.array([r[0] for r in rows], dtype=np.intp),
            columns=np.array([r[1] for r in rows], dtype=np.intp),
            x=np.array([r[2] for r in rows], dtype=bool),
            z=np.array([r[3] for r in rows], dtype=bool),
            measurements=np.array([m for m, _ in measured], dtype=np.intp),
            measurement_columns=np.array([c for _, c in measured], dtype=np.intp),
        )
    return batches


@dataclass
class _NoiseGroup:
    """Sites of one timestep sharing an identical channel."""

    qubits: np.ndarray       # (sites, arity)
    cumulative: np.ndarray   # (outcomes,)
    x: np.ndarray            # (outcomes + 1, arity); last row is the identity
    z: np.ndarray


@dataclass
class _MeasureGroup:
    qubits: np.ndarray
    records: np.ndarray
    flip_probability: np.ndarray


@dataclass
class _CompiledStep:
    resets: Dict[str, np.ndarray] = field(default_factory=dict)
    gates: Dict[str, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    measurements: Dict[str, _MeasureGroup] = field(default_factory=dict)
    noise: List[_NoiseGroup] = field(default_factory=list)


def _compile_noise(sites: Sequence[NoiseSite]) -> List[_NoiseGroup]:
    grouped: Dict[Tuple, List[Tuple[int, ...]]] = {}
    for site in sites:
        grouped.setdefault(site.outcomes, []).append(site.qubits)
    groups = []
    for outcomes, qubits in grouped.items():
        arity = len(qubits[0])
        xs = np.zeros((len(outcomes) + 1, arity), dtype=bool)
        zs = np.zeros_like(xs)
        for row, (label, _) in enumerate(outcomes):
            for j, letter in enumerate(label):
                xs[row, j], zs[row, j] = PAULI_BITS[letter]
        groups.append(
            _NoiseGroup(
                qubits=np.asarray(qubits, dtype=np.intp),
                cumulative=np.cumsum([p for _, p in outcomes]),
                x=xs,
                z=zs,
            )
        )
    return groups


def measurement_matrix(groups: Sequence[Sequence[int]], num_measurements: int) -> sparse.csr_matrix:
    """Sparse (len(groups), num_measurements) incidence matrix of detectors or observables."""
    rows = [i for i, members in enumerate(groups) for _ in members]
    cols = [m for members in groups for m in members]
    data = np.ones(len(cols), dtype=np.uint8)
    return sparse.csr_matrix((data, (rows, cols)), shape=(len(groups), num_measurements), dtype=np.uint8)


def parity(matrix: sparse.csr_matrix, records: np.ndarray) -> np.ndarray:
    """XOR of the selected measurement records; returns (columns, rows) booleans."""
    # uint8 wraparound is mod 256 and keeps parity
    return ((matrix @ records.view(np.uint8)) & 1).astype(bool).T


class FrameSimulator:
    """Compiled Pauli-frame engine for one circuit."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.num_qubits = circuit.num_qubits
        self.num_measurements = circuit.num_measurements
        self.detector_matrix = measurement_matrix(circuit.detectors, self.num_measurements)
        self.observable_matrix = measurement_matrix(circuit.observables, self.num_measurements)
        self.steps = self._compile()

    def _compile(self) -> List[_CompiledStep]:
        steps = []
        record = 0
        for ts in self.circuit.timesteps:
            resets: Dict[str, List[int]] = {}
            gates: Dict[str, Tuple[List[int], List[int]]] = {}
            measures: Dict[str, Tuple[List[int], List[int], List[float]]] = {}
            for ins in ts.instructions:
                if ins.name in PREPARATIONS:
                    resets.setdefault(PREPARATIONS[ins.name], []).extend(ins.targets)
                elif ins.name in MEASUREMENTS:
                    q, r, p = measures.setdefault(MEASUREMENTS[ins.name], ([], [], []))
                    q.extend(ins.targets)
                    r.append(record)
                    p.append(ins.flip_probability)
                    record += 1
                elif len(ins.targets) == 2:
                    c, t = gates.setdefault(ins.name, ([], []))
                    c.append(ins.targets[0])
                    t.append(ins.targets[1])
            steps.append(
                _CompiledStep(
                    resets={b: np.asarray(q, dtype=np.intp) for b, q in resets.items()},
                    gates={
                        name: (np.asarray(c, dtype=np.intp), np.asarray(t, dtype=np.intp))
                        for name, (c, t) in gates.items()
                    },
                    measurements={
                        b: _MeasureGroup(
                            np.asarray(q, dtype=np.intp), np.asarray(r, dtype=np.intp), np.asarray(p)
                        )
                        for b, (q, r, p) in measures.items()
                    },
                    noise=_compile_noise(ts.noise),
                )
            )
        return steps

    @staticmethod
    def _randomize(basis: str, qubits: np.ndarray, x: np.ndarray, z: np.ndarray, rng: np.random.Generator) -> None:
        # the component matching the basis letter acts trivially on the eigenstate
        coin = rng.random((len(qubits), x.shape[1])) < 0.5
        if basis in ("X", "Y"):
            x[qubits] ^= coin
        if basis in ("Z", "Y"):
            z[qubits] ^= coin

    @staticmethod
    def _apply_gate(name: str, c: np.ndarray, t: np.ndarray, x: np.ndarray, z: np.ndarray) -> None:
        if name == "CX":
            x[t] ^= x[c]
            z[c] ^= z[t]
        elif name == "CZ":
            xc, xt = x[c], x[t]
            z[c] ^= xt
            z[t] ^= xc
        elif name == "CY":
            z[c] ^= x[t] ^ z[t]
            xc = x[c]
            x[t] ^= xc
            z[t] ^= xc
        else:
            raise ValueError(f"unsupported gate {name}")

    def run(
        self,
        columns: int,
        rng: Optional[np.random.Generator] = None,
        sample_noise: bool = True,
        injections: Sequence[Injection] = (),
        randomize_gauge: bool = False,
    ) -> np.ndarray:
        """
        Propagate ``columns`` frames through the circuit.

        Returns the (num_measurements, columns) boolean array of measurement flips.
        Noise is sampled only when ``sample_noise`` is set and an ``rng`` is given.
        """
        x = np.zeros((self.num_qubits, columns), dtype=bool)
        z = np.zeros_like(x)
        records = np.zeros((self.num_measurements, columns), dtype=bool)
        sampling = sample_noise and rng is not None

        by_step = _group_injections(injections)

        for index, step in enumerate(self.steps):
            for basis, qubits in step.resets.items():
                x[qubits] = False
                z[qubits] = False
                if randomize_gauge and rng is not None:
                    self._randomize(basis, qubits, x, z, rng)
            for name, (c, t) in step.gates.items():
                self._apply_gate(name, c, t, x, z)
            for basis, group in step.measurements.items():
                if basis == "X":
                    flips = z[group.qubits]
                elif basis == "Z":
                    flips = x[group.qubits]
                else:
                    flips = x[group.qubits] ^ z[group.qubits]
                if sampling and group.flip_probability.any():
                    flips = flips ^ (rng.random(flips.shape) < group.flip_probability[:, None])
                records[group.records] = flips
                if randomize_gauge and rng is not None:
                    self._randomize(basis, group.qubits, x, z, rng)
            if sampling:
                for noise in step.noise:
                    self._sample_noise(noise, x, z, rng)
            if index in by_step:
                self._inject(by_step[index], x, z, records)
        return records

    @staticmethod
    def _sample_noise(group: _NoiseGroup, x: np.ndarray, z: np.ndarray, rng: np.random.Generator) -> None:
        draws = rng.random((len(group.qubits), x.shape[1]))
        outcome = np.searchsorted(group.cumulative, draws, side="right")
        for j in range(group.qubits.shape[1]):
            targets = group.qubits[:, j]
            x[targets] ^= group.x[outcome, j]
            z[targets] ^= group.z[outcome, j]

    @staticmethod
    def _inject(batch: _InjectionBatch, x: np.ndarray, z: np.ndarray, records: np.ndarray) -> None:
        x[batch.qubits, batch.columns] ^= batch.x
        z[batch.qubits, batch.columns] ^= batch.z
        records[batch.measurements, batch.measurement_columns] ^= True

    def detectors_and_observables(self, records: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(columns, detectors) and (columns, observables) boolean arrays."""
        return parity(self.detector_matrix, records), parity(self.observable_matrix, records)
