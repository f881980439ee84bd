"""Seeded shot sampling of detector and observable bits."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import get_settings
from app.core.exceptions import DimensionError, ParameterError
from app.services.circuit import Circuit
from app.services.frame import FrameSimulator

logger = logging.getLogger(__name__)

settings = get_settings()


@dataclass(frozen=True)
class ShotBatch:
    """Detector and observable bits of ``shots`` shots, one row per shot."""

    shots: int
    detector_bits: np.ndarray
    observable_bits: np.ndarray
    rng_seed: int

    def __post_init__(self) -> None:
        if self.detector_bits.shape[0] != self.shots or self.observable_bits.shape[0] != self.shots:
            raise DimensionError(
                f"bit matrices have {self.detector_bits.shape[0]} and {self.observable_bits.shape[0]} rows, "
                f"expected {self.shots}"
            )

    @property
    def num_detectors(self) -> int:
        return self.detector_bits.shape[1]

    @property
    def num_observables(self) -> int:
        return self.observable_bits.shape[1]

    def to_b8(self, path: Path | str) -> None:
        """Row-packed little-endian bits: detectors then observables, each shot padded to whole bytes."""
        bits = np.hstack([self.detector_bits, self.observable_bits]).astype(bool)
        np.packbits(bits, axis=1, bitorder="little").tofile(Path(path))

    @classmethod
    def from_b8(cls, path: Path | str, num_detectors: int, num_observables: int, rng_seed: int = 0) -> "ShotBatch":
        width = num_detectors + num_observables
        row_bytes = (width + 7) // 8
        raw = np.fromfile(Path(path), dtype=np.uint8)
        if row_bytes == 0 or raw.size % row_bytes:
            raise DimensionError(f"{raw.size} bytes is not a whole number of {row_bytes}-byte shots")
        bits = np.unpackbits(raw.reshape(-1, row_bytes), axis=1, count=width, bitorder="little").astype(bool)
        return cls(
            shots=bits.shape[0],
            detector_bits=bits[:, :num_detectors],
            observable_bits=bits[:, num_detectors:],
            rng_seed=rng_seed,
        )

    def to_csv(self, path: Path | str) -> None:
        header = ["shot"] + [f"D{i}" for i in range(self.num_detectors)] + [f"L{k}" for k in range(self.num_observables)]
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            bits = np.hstack([self.detector_bits, self.observable_bits]).astype(np.uint8)
            for shot, row in enumerate(bits):
                writer.writerow([shot, *row.tolist()])

    @classmethod
    def concatenate(cls, batches: Sequence["ShotBatch"], rng_seed: int) -> "ShotBatch":
        return cls(
            shots=sum(b.shots for b in batches),
            detector_bits=np.vstack([b.detector_bits for b in batches]),
            observable_bits=np.vstack([b.observable_bits for b in batches]),
            rng_seed=rng_seed,
        )


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based generator of one chunk; independent of how chunks are spread over workers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def chunk_sizes(shots: int, chunk_shots: Optional[int] = None) -> List[int]:
    size = chunk_shots or settings.SAMPLER_CHUNK_SHOTS
    full, rest = divmod(shots, size)
    return [size] * full + ([rest] if rest else [])


def sample_chunk(
    simulator: FrameSimulator, shots: int, seed: int, chunk: int
) -> Tuple[np.ndarray, np.ndarray]:
    records = simulator.run(shots, rng=chunk_rng(seed, chunk))
    return simulator.detectors_and_observables(records)


def sample(
    circuit: Circuit,
    shots: int,
    seed: Optional[int] = None,
    simulator: Optional[FrameSimulator] = None,
) -> ShotBatch:
    """
    Sample ``shots`` shots of a noisy circuit.

    Shots are split into chunks of SAMPLER_CHUNK_SHOTS; chunk k always draws
    from substream k of ``seed``, so the output is bit-identical for a given
    (circuit, shots, seed).
    """
    if shots < 0:
        raise ParameterError(f"shots must be >= 0, got {shots}")
    seed = settings.DEFAULT_SEED if seed is None else seed
    simulator = simulator or FrameSimulator(circuit)
    detectors, observables = [], []
    for chunk, size in enumerate(chunk_sizes(shots)):
        d, o = sample_chunk(simulator, size, seed, chunk)
        detectors.append(d)
        observables.append(o)
    if not detectors:
        detectors = [np.zeros((0, circuit.num_detectors), dtype=bool)]
        observables = [np.zeros((0, circuit.num_observables), dtype=bool)]
    batch = ShotBatch(
        shots=shots,
        detector_bits=np.vstack(detectors),
        observable_bits=np.vstack(observables),
        rng_seed=seed,
    )
    logger.debug(f"Sampled {shots} shots (seed {seed}); mean detector rate {batch.detector_bits.mean() if shots else 0:.4g}")
    return batch


@dataclass(frozen=True)
class DeterminismReport:
    random_detectors: Tuple[int, ...]
    random_observables: Tuple[int, ...]

    @property
    def is_deterministic(self) -> bool:
        return not self.random_detectors and not self.random_observables


def check_determinism(circuit: Circuit, shots: int = 256, seed: Optional[int] = None) -> DeterminismReport:
    """
    Run the noiseless circuit with the unobservable frame component randomized
    after every reset and measurement; a detector or observable that is not
    fixed by the stabilizer state then shows up as a random bit.
    """
    seed = settings.DEFAULT_SEED if seed is None else seed
    simulator = FrameSimulator(circuit.without_noise())
    records = simulator.run(shots, rng=chunk_rng(seed, 0), sample_noise=False, randomize_gauge=True)
    detectors, observables = simulator.detectors_and_observables(records)
    report = DeterminismReport(
        random_detectors=tuple(int(i) for i in np.flatnonzero(detectors.any(axis=0))),
        random_observables=tuple(int(i) for i in np.flatnonzero(observables.any(axis=0))),
    )
    if not report.is_deterministic:
        logger.warning(
            f"Non-deterministic detectors {report.random_detectors[:10]} "
            f"observables {report.random_observables}"
        )
    return report
