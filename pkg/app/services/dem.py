"""
Detector error models: every noise-site outcome propagated to the detectors
and observables it flips, merged by signature and decomposed into graphlike
parts for matching.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from app.core.config import get_settings
from app.core.exceptions import DecompositionError, UndetectableLogicalError
from app.services.circuit import Circuit
from app.services.frame import FrameSimulator, Injection
from app.services.gf2 import BinaryMatrix, gf2_kernel

logger = logging.getLogger(__name__)

settings = get_settings()

PROPAGATION_BATCH = 4096
MAX_DECOMPOSED_DETECTORS = 8
MAX_PRUNED_KERNEL = 16

Part = Tuple[Tuple[int, ...], Tuple[int, ...]]


def xor_probability(p1: float, p2: float) -> float:
    """Probability that exactly one of two independent events occurs."""
    return p1 * (1 - p2) + p2 * (1 - p1)


def symmetric_difference(*groups: Iterable[int]) -> Tuple[int, ...]:
    result: set = set()
    for group in groups:
        result ^= set(group)
    return tuple(sorted(result))


@dataclass(frozen=True)
class ErrorMechanism:
    probability: float
    detectors: Tuple[int, ...]
    observables: Tuple[int, ...] = ()
    decomposition: Optional[Tuple[Part, ...]] = None

    @property
    def signature(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        return (self.detectors, self.observables)

    @property
    def is_graphlike(self) -> bool:
        return len(self.detectors) <= 2

    @property
    def parts(self) -> Tuple[Part, ...]:
        """Graphlike pieces: the decomposition, or the mechanism itself."""
        if self.decomposition is not None:
            return self.decomposition
        return ((self.detectors, self.observables),)


@dataclass(frozen=True)
class DetectorErrorModel:
    num_detectors: int
    num_observables: int
    mechanisms: Tuple[ErrorMechanism, ...]
    detector_coords: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.mechanisms)

    @property
    def is_decomposed(self) -> bool:
        return all(m.is_graphlike or m.decomposition is not None for m in self.mechanisms)

    @cached_property
    def priors(self) -> np.ndarray:
        return np.array([m.probability for m in self.mechanisms], dtype=float)

    @cached_property
    def check_matrix(self) -> sparse.csr_matrix:
        """Detector-by-mechanism incidence matrix H."""
        return _incidence([m.detectors for m in self.mechanisms], self.num_detectors)

    @cached_property
    def observable_matrix(self) -> sparse.csr_matrix:
        return _incidence([m.observables for m in self.mechanisms], self.num_observables)

    def graphlike(self) -> List[Tuple[int, ErrorMechanism]]:
        return [(i, m) for i, m in enumerate(self.mechanisms) if m.is_graphlike]

    def hyperedges(self) -> List[Tuple[int, ErrorMechanism]]:
        return [(i, m) for i, m in enumerate(self.mechanisms) if not m.is_graphlike]

    def syndrome(self, mechanisms: Sequence[int]) -> np.ndarray:
        """Detector bits flipped by a set of mechanisms."""
        bits = np.zeros(self.num_detectors, dtype=bool)
        for i in mechanisms:
            bits[list(self.mechanisms[i].detectors)] ^= True
        return bits

    def observable_flips(self, mechanisms: Sequence[int]) -> np.ndarray:
        bits = np.zeros(self.num_observables, dtype=bool)
        for i in mechanisms:
            bits[list(self.mechanisms[i].observables)] ^= True
        return bits

    def lightest_equivalent(self, mechanisms: Sequence[int]) -> Tuple[int, ...]:
        """
        Cheapest subset of ``mechanisms`` with the same syndrome.

        Such subsets differ from the full set by a kernel vector of H restricted
        to these columns. Every kernel combination is tried and the smallest
        summed log((1 - p) / p) wins, the full set on ties. A kernel of more
        than MAX_PRUNED_KERNEL dimensions leaves the set unchanged.
        """
        support = np.array(sorted({int(i) for i in mechanisms}), dtype=np.intp)
        if support.size == 0:
            return ()
        kernel = gf2_kernel(BinaryMatrix.from_dense(self.check_matrix[:, support].toarray()))
        k = kernel.shape[0]
        if k == 0:
            return tuple(int(i) for i in support)
        if k > MAX_PRUNED_KERNEL:
            logger.debug(f"Not pruning {support.size} mechanisms: kernel dimension {k}")
            return tuple(int(i) for i in support)
        combos = (np.arange(1 << k)[:, None] >> np.arange(k)) & 1
        dropped = (combos @ kernel.astype(np.int64)) & 1
        floor = settings.MECHANISM_PROBABILITY_FLOOR
        p = np.clip(self.priors[support], floor, 1 - floor)
        costs = (1 - dropped) @ (np.log1p(-p) - np.log(p))
        keep = dropped[int(np.argmin(costs))] == 0
        return tuple(int(i) for i in support[keep])


def _incidence(columns: Sequence[Sequence[int]], rows: int) -> sparse.csr_matrix:
    r = [d for members in columns for d in members]
    c = [j for j, members in enumerate(columns) for _ in members]
    data = np.ones(len(r), dtype=np.uint8)
    return sparse.csr_matrix((data, (r, c)), shape=(rows, len(columns)), dtype=np.uint8)


@dataclass(frozen=True)
class Fault:
    """One outcome of one noise site (or a measurement flip), located after ``timestep``."""

    timestep: int
    probability: float
    qubits: Tuple[int, ...] = ()
    label: str = ""
    measurement: Optional[int] = None

    def injection(self, column: int) -> Injection:
        return Injection(
            column=column,
            timestep=self.timestep,
            qubits=self.qubits,
            label=self.label,
            measurement=self.measurement,
        )


def enumerate_faults(circuit: Circuit) -> List[Fault]:
    faults = []
    measurement = 0
    for index, ts in enumerate(circuit.timesteps):
        for ins in ts.instructions:
            if not ins.is_measurement:
                continue
            if ins.flip_probability > 0:
                faults.append(Fault(index, ins.flip_probability, measurement=measurement))
            measurement += 1
        for site in ts.noise:
            for label, p in site.outcomes:
                faults.append(Fault(index, p, qubits=site.qubits, label=label))
    return faults


def propagate_faults(
    circuit: Circuit, faults: Sequence[Fault], simulator: Optional[FrameSimulator] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Noiseless propagation of every fault; returns (faults, detectors) and (faults, observables) bits."""
    simulator = simulator or FrameSimulator(circuit)
    detectors, observables = [], []
    for start in range(0, len(faults), PROPAGATION_BATCH):
        batch = faults[start:start + PROPAGATION_BATCH]
        records = simulator.run(len(batch), injections=[f.injection(k) for k, f in enumerate(batch)])
        d, o = simulator.detectors_and_observables(records)
        detectors.append(d)
        observables.append(o)
    if not detectors:
        return (
            np.zeros((0, circuit.num_detectors), dtype=bool),
            np.zeros((0, circuit.num_observables), dtype=bool),
        )
    return np.vstack(detectors), np.vstack(observables)


def merge_mechanisms(mechanisms: Iterable[ErrorMechanism], floor: Optional[float] = None) -> List[ErrorMechanism]:
    """Combine mechanisms with identical signatures by odd-XOR and sort canonically."""
    floor = settings.MECHANISM_PROBABILITY_FLOOR if floor is None else floor
    merged: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], float] = {}
    for m in mechanisms:
        if not m.detectors and not m.observables:
            continue
        key = m.signature
        merged[key] = xor_probability(merged[key], m.probability) if key in merged else m.probability
    return [
        ErrorMechanism(probability=p, detectors=d, observables=o)
        for (d, o), p in sorted(merged.items())
        if p >= floor
    ]


def build_dem(circuit: Circuit, decompose: bool = False) -> DetectorErrorModel:
    """
    Extract the detector error model of a noisy circuit.

    Each fault is treated as an independent mechanism with its site
    probability.

    Raises:
        UndetectableLogicalError: a fault flips an observable but no detector
    """
    faults = enumerate_faults(circuit)
    detector_bits, observable_bits = propagate_faults(circuit, faults)
    raw = []
    for fault, d_row, o_row in zip(faults, detector_bits, observable_bits):
        detectors = tuple(int(i) for i in np.flatnonzero(d_row))
        observables = tuple(int(i) for i in np.flatnonzero(o_row))
        if observables and not detectors:
            raise UndetectableLogicalError(
                f"fault {fault.label or 'measurement flip'} on {fault.qubits or fault.measurement} "
                f"after timestep {fault.timestep} flips observables {observables} without detection",
                observables,
            )
        raw.append(ErrorMechanism(fault.probability, detectors, observables))
    dem = DetectorErrorModel(
        num_detectors=circuit.num_detectors,
        num_observables=circuit.num_observables,
        mechanisms=tuple(merge_mechanisms(raw)),
        detector_coords=circuit.detector_coords,
    )
    logger.info(
        f"Built DEM: {len(faults)} faults -> {len(dem)} mechanisms over {dem.num_detectors} detectors "
        f"({len(dem.hyperedges())} hyperedges)"
    )
    return decompose_hyperedges(dem) if decompose else dem


def _edge_partitions(
    detectors: Tuple[int, ...], edges: Dict[Tuple[int, ...], Tuple[float, Tuple[int, ...]]]
) -> Iterator[List[Tuple[int, ...]]]:
    """Partitions of ``detectors`` into blocks of one or two that exist as graphlike detector sets."""
    if not detectors:
        yield []
        return
    first, rest = detectors[0], detectors[1:]
    if (first,) in edges:
        for tail in _edge_partitions(rest, edges):
            yield [(first,)] + tail
    for i, other in enumerate(rest):
        if (first, other) in edges:
            for tail in _edge_partitions(rest[:i] + rest[i + 1:], edges):
                yield [(first, other)] + tail


def decompose_hyperedges(dem: DetectorErrorModel) -> DetectorErrorModel:
    """
    Split every mechanism of three or more detectors into existing graphlike detector sets.

    Each part takes the probability and observable mask of the most probable
    graphlike mechanism with its detector set. Mechanisms of three or four
    detectors are split into at most two parts when such a split exists.
    Partitions whose masks already XOR to the hyperedge's mask are preferred,
    then the cheapest, summing -log p over the parts, so the decomposition is
    the explanation a matcher would pick on the prior graph; ties go to the
    lexicographically smallest sorted parts. Without a consistent
    partition, the remainder is added to the part holding the smallest
    detector.

    Raises:
        DecompositionError: more than MAX_DECOMPOSED_DETECTORS detectors, or no
            partition into existing edges
    """
    best_mask: Dict[Tuple[int, ...], Tuple[float, Tuple[int, ...]]] = {}
    for _, m in dem.graphlike():
        if m.detectors and (m.detectors not in best_mask or m.probability > best_mask[m.detectors][0]):
            best_mask[m.detectors] = (m.probability, m.observables)

    mechanisms = []
    fallbacks = 0
    for m in dem.mechanisms:
        if m.is_graphlike:
            mechanisms.append(replace(m, decomposition=None))
            continue
        if len(m.detectors) > MAX_DECOMPOSED_DETECTORS:
            raise DecompositionError(
                f"mechanism {m.detectors} flips {len(m.detectors)} detectors; "
                f"at most {MAX_DECOMPOSED_DETECTORS} are supported",
                m.detectors,
                m.observables,
            )
        options = []
        for parts in _edge_partitions(m.detectors, best_mask):
            masks = [best_mask[p][1] for p in parts]
            consistent = symmetric_difference(*masks) == m.observables
            cost = sum(-np.log(best_mask[p][0]) for p in parts)
            options.append((not consistent, float(cost), parts, masks))
        if len(m.detectors) <= 4:
            options = [o for o in options if len(o[2]) <= 2] or options
        if not options:
            raise DecompositionError(
                f"mechanism {m.detectors} has no decomposition into existing graphlike mechanisms",
                m.detectors,
                m.observables,
            )
        inconsistent, _, parts, masks = min(options)
        if inconsistent:
            fallbacks += 1
            remainder = symmetric_difference(m.observables, *masks)
            masks[0] = symmetric_difference(masks[0], remainder)
        mechanisms.append(replace(m, decomposition=tuple(zip(parts, masks))))

    if fallbacks:
        logger.warning(f"{fallbacks} hyperedges decomposed with an observable remainder")
    return replace(dem, mechanisms=tuple(mechanisms))
