"""
Monte Carlo memory experiments: build, sample, decode, count.

A point's shots are split into sampler chunks; chunk k always uses RNG
substream k, so failure counts do not depend on how many worker processes
share the work. Finished points are appended to a JSON-lines checkpoint.
"""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.config import get_settings
from app.core.logging import LoggerConfig
from app.schemas.experiment import ExperimentSpec, MonteCarloPoint
from app.services.circuit import Circuit, memory_circuit
from app.services.codes import build_layout
from app.services.decoders import Decoder, build_decoder
from app.services.dem import DetectorErrorModel, build_dem
from app.services.frame import FrameSimulator
from app.services.noise import NoiseModel
from app.services.sampler import chunk_sizes, sample_chunk

logger = logging.getLogger(__name__)

settings = get_settings()

TELEMETRY_COLUMNS = (
    "shot", "bp_converged", "iterations", "matched_weight", "clusters_grown", "predicted", "actual"
)

POINT_COLUMNS = (
    "family", "d_x", "d_z", "decoder", "p", "p_cx", "eta", "rounds", "basis", "spam",
    "shots", "failures", "failure_rate", "standard_error", "wilson_low", "wilson_high",
    "seed", "bp_converged",
)


@dataclass(frozen=True)
class Experiment:
    """Circuit, DEM and decoder of one spec; the decoder is None for noiseless circuits."""

    spec: ExperimentSpec
    circuit: Circuit
    dem: DetectorErrorModel
    simulator: FrameSimulator
    decoder: Optional[Decoder]


def build_experiment(spec: ExperimentSpec) -> Experiment:
    layout = build_layout(spec.code.family, spec.code.d_x, spec.code.d_z)
    model = NoiseModel(spec.p, spec.eta)
    circuit = memory_circuit(layout, model, spec.resolved_rounds, spec.basis, spec.spam)
    if model.is_noiseless:
        dem = DetectorErrorModel(circuit.num_detectors, circuit.num_observables, ())
        decoder = None
    else:
        dem = build_dem(circuit, decompose=True)
        decoder = build_decoder(dem, spec.decoder)
    return Experiment(spec, circuit, dem, FrameSimulator(circuit), decoder)


# per-process cache so a worker builds each experiment once
_EXPERIMENTS: Dict[Tuple, Experiment] = {}


def _experiment(spec: ExperimentSpec) -> Experiment:
    key = spec.key()
    if key not in _EXPERIMENTS:
        _EXPERIMENTS.clear()
        _EXPERIMENTS[key] = build_experiment(spec)
    return _EXPERIMENTS[key]


@dataclass
class ChunkResult:
    chunk: int
    shots: int
    failures: int
    bp_converged: int
    telemetry: List[Tuple] = field(default_factory=list)


def _bits(row: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in row)


def run_chunk(spec: ExperimentSpec, seed: int, chunk: int, shots: int, offset: int, telemetry: bool = False) -> ChunkResult:
    """Sample and decode one chunk; ``offset`` is the index of its first shot."""
    experiment = _experiment(spec)
    detectors, observables = sample_chunk(experiment.simulator, shots, seed, chunk)
    if experiment.decoder is None:
        return ChunkResult(chunk=chunk, shots=shots, failures=0, bp_converged=0)
    outcomes = experiment.decoder.decode_batch(detectors)
    predicted = (
        np.vstack([o.predicted for o in outcomes]) if outcomes else np.zeros_like(observables)
    )
    wrong = np.any(predicted != observables, axis=1)
    rows = []
    if telemetry:
        for i, outcome in enumerate(outcomes):
            rows.append((
                offset + i,
                "" if outcome.bp_converged is None else int(outcome.bp_converged),
                outcome.bp_iterations,
                "" if outcome.matched_weight is None else f"{outcome.matched_weight:.6g}",
                outcome.clusters_grown,
                _bits(predicted[i]),
                _bits(observables[i]),
            ))
    logger.debug(f"Chunk {chunk}: {int(wrong.sum())} failures in {shots} shots")
    return ChunkResult(
        chunk=chunk,
        shots=shots,
        failures=int(wrong.sum()),
        bp_converged=sum(1 for o in outcomes if o.bp_converged),
        telemetry=rows,
    )


def _run_chunk_task(task: Tuple) -> ChunkResult:
    spec_json, seed, chunk, shots, offset, telemetry = task
    return run_chunk(ExperimentSpec.model_validate_json(spec_json), seed, chunk, shots, offset, telemetry)


def write_telemetry(path: Union[str, Path], rows: Iterable[Tuple]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(TELEMETRY_COLUMNS)
        writer.writerows(rows)


def run_point(
    spec: ExperimentSpec,
    workers: Optional[int] = None,
    telemetry_path: Optional[Union[str, Path]] = None,
) -> MonteCarloPoint:
    """
    Failures of ``spec.shots`` decoded shots.

    Chunks go to a process pool when more than one worker is available; a
    single collector sums the per-chunk counts in chunk order.
    """
    seed = settings.DEFAULT_SEED if spec.seed is None else spec.seed
    sizes = chunk_sizes(spec.shots)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int) if sizes else []
    telemetry = telemetry_path is not None
    workers = settings.worker_count if workers is None else workers
    started = time.perf_counter()

    if workers <= 1 or len(sizes) <= 1:
        results = [
            run_chunk(spec, seed, k, size, int(offsets[k]), telemetry) for k, size in enumerate(sizes)
        ]
    else:
        spec_json = spec.model_dump_json()
        tasks = [(spec_json, seed, k, size, int(offsets[k]), telemetry) for k, size in enumerate(sizes)]
        with get_context("spawn").Pool(
            processes=min(workers, len(tasks)),
            initializer=LoggerConfig.init_worker,
            initargs=(LoggerConfig.current_level(),),
        ) as pool:
            results = list(pool.imap(_run_chunk_task, tasks))

    if telemetry:
        write_telemetry(telemetry_path, (row for r in results for row in r.telemetry))

    point = MonteCarloPoint(
        spec=spec,
        shots=sum(r.shots for r in results),
        failures=sum(r.failures for r in results),
        seed=seed,
        bp_converged=sum(r.bp_converged for r in results),
        seconds=time.perf_counter() - started,
    )
    logger.info(
        f"{spec.code.label} {spec.decoder.name.value} p={spec.p:g} eta={spec.eta:g}: "
        f"{point.failures}/{point.shots} failures ({point.seconds:.1f}s)"
    )
    return point


def load_points(path: Union[str, Path]) -> List[MonteCarloPoint]:
    path = Path(path)
    if not path.exists():
        return []
    points = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                points.append(MonteCarloPoint.model_validate_json(line))
    return points


def append_point(path: Union[str, Path], point: MonteCarloPoint) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as f:
        f.write(point.model_dump_json() + "\n")


def run_points(
    specs: Sequence[ExperimentSpec],
    checkpoint_path: Optional[Union[str, Path]] = None,
    workers: Optional[int] = None,
    resume: bool = True,
) -> List[MonteCarloPoint]:
    """
    Run every spec, appending each finished point to the checkpoint.

    With ``resume`` a spec whose key already has a checkpointed point with at
    least as many shots is not re-run. An exception leaves every point
    finished so far on disk.
    """
    done: Dict[Tuple, MonteCarloPoint] = {}
    if checkpoint_path is not None and resume:
        for point in load_points(checkpoint_path):
            done[point.spec.key()] = point
        if done:
            logger.warning(f"Resuming from {checkpoint_path}: {len(done)} points already present")

    points = []
    for spec in specs:
        previous = done.get(spec.key())
        if previous is not None and previous.shots >= spec.shots:
            points.append(previous)
            continue
        try:
            point = run_point(spec, workers=workers)
        except Exception as e:
            logger.error(f"Point {spec.code.label} p={spec.p:g} failed: {e}")
            raise
        if checkpoint_path is not None:
            append_point(checkpoint_path, point)
        points.append(point)
    return points


def points_to_csv(points: Sequence[MonteCarloPoint], path: Union[str, Path]) -> None:
    """Plot-ready table, one row per point."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(POINT_COLUMNS)
        for pt in points:
            spec = pt.spec
            low, high = pt.wilson
            writer.writerow((
                spec.code.family.value, spec.code.d_x, spec.code.height, spec.decoder.name.value,
                spec.p, pt.p_cx, spec.eta, spec.resolved_rounds, spec.basis, spec.spam.value,
                pt.shots, pt.failures, pt.failure_rate, pt.standard_error, low, high,
                pt.seed, pt.bp_converged,
            ))
