"""
Circuit-level distance of a detector error model and exhaustive fault checks.

The circuit distance is the smallest number of mechanisms whose combined
syndrome is empty but which flip an observable.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import shortest_path

from app.core.config import get_settings
from app.core.exceptions import ParameterError
from app.services.decoders import Decoder
from app.services.dem import DetectorErrorModel

logger = logging.getLogger(__name__)

settings = get_settings()


def graphlike_distance(dem: DetectorErrorModel) -> Optional[int]:
    """
    Fewest graphlike mechanisms forming an undetectable logical error.

    Every node of the detector graph (plus the boundary) is doubled into an
    even and an odd observable-parity copy; an edge flipping an observable
    swaps copies. The answer is the shortest unit-cost path from any node's
    even copy to its own odd copy. Returns None when no such cycle exists.
    """
    boundary = dem.num_detectors
    nodes = dem.num_detectors + 1
    rows: List[int] = []
    cols: List[int] = []
    for _, m in dem.graphlike():
        if not m.detectors:
            continue
        u = m.detectors[0]
        v = m.detectors[1] if len(m.detectors) == 2 else boundary
        flip = 1 if m.observables else 0
        for parity in (0, 1):
            target = (parity ^ flip) * nodes
            rows += [u + parity * nodes, v + parity * nodes]
            cols += [v + target, u + target]
    if not rows:
        return None
    # duplicate entries sum, which an unweighted search ignores
    graph = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(2 * nodes, 2 * nodes)
    )
    distances = shortest_path(graph, directed=True, unweighted=True, indices=np.arange(nodes))
    loops = distances[np.arange(nodes), np.arange(nodes) + nodes]
    best = loops.min()
    return int(best) if np.isfinite(best) else None


@dataclass(frozen=True)
class _SearchTables:
    detector_masks: Tuple[int, ...]
    observable_masks: Tuple[int, ...]
    touching: Dict[int, Tuple[int, ...]]
    widest: int


def _tables(dem: DetectorErrorModel) -> _SearchTables:
    touching: Dict[int, List[int]] = {}
    for i, m in enumerate(dem.mechanisms):
        for d in m.detectors:
            touching.setdefault(d, []).append(i)
    return _SearchTables(
        detector_masks=tuple(sum(1 << d for d in m.detectors) for m in dem.mechanisms),
        observable_masks=tuple(sum(1 << k for k in m.observables) for m in dem.mechanisms),
        touching={d: tuple(ids) for d, ids in touching.items()},
        widest=max((len(m.detectors) for m in dem.mechanisms), default=1) or 1,
    )


def _extend(
    tables: _SearchTables, chosen: List[int], used: Set[int], syndrome: int, observables: int, budget: int
) -> Optional[Tuple[int, ...]]:
    if syndrome == 0:
        return tuple(sorted(chosen)) if observables else None
    if budget == 0 or math.ceil(syndrome.bit_count() / tables.widest) > budget:
        return None
    lowest = (syndrome & -syndrome).bit_length() - 1
    for i in tables.touching.get(lowest, ()):
        if i in used:
            continue
        used.add(i)
        chosen.append(i)
        found = _extend(
            tables,
            chosen,
            used,
            syndrome ^ tables.detector_masks[i],
            observables ^ tables.observable_masks[i],
            budget - 1,
        )
        chosen.pop()
        used.discard(i)
        if found is not None:
            return found
    return None


def find_undetectable_logical(dem: DetectorErrorModel, max_weight: int) -> Optional[Tuple[int, ...]]:
    """
    Smallest mechanism set (weight <= ``max_weight``) with empty syndrome and
    a nonzero observable flip, by iterative deepening.

    A minimal such set contains an observable-flipping mechanism, so every
    search starts from one and then repeatedly branches on the mechanisms
    touching the lowest flipped detector.
    """
    if max_weight < 1:
        raise ParameterError(f"max_weight must be >= 1, got {max_weight}")
    tables = _tables(dem)
    starts = [i for i, mask in enumerate(tables.observable_masks) if mask]
    for weight in range(1, max_weight + 1):
        for start in starts:
            found = _extend(
                tables,
                [start],
                {start},
                tables.detector_masks[start],
                tables.observable_masks[start],
                weight - 1,
            )
            if found is not None:
                logger.debug(f"Undetectable logical of weight {weight}: mechanisms {found}")
                return found
    return None


def min_undetectable_weight(dem: DetectorErrorModel, max_weight: int) -> Optional[int]:
    """Exact minimum weight of an undetectable logical error, or None if above ``max_weight``."""
    found = find_undetectable_logical(dem, max_weight)
    return None if found is None else len(found)


@dataclass(frozen=True)
class CircuitDistance:
    distance: Optional[int]
    graphlike: Optional[int]
    certified: bool


def circuit_distance(dem: DetectorErrorModel, exhaustive_below: Optional[int] = None) -> CircuitDistance:
    """
    Graphlike distance, checked against an exhaustive search of every smaller
    weight below ``exhaustive_below`` (default: all of them).

    ``certified`` is true when the search covered every weight below the
    reported distance.
    """
    graphlike = graphlike_distance(dem)
    if graphlike is None and exhaustive_below is None:
        raise ParameterError("no graphlike logical; pass exhaustive_below to bound the search")
    ceiling = graphlike - 1 if graphlike is not None else exhaustive_below - 1
    if exhaustive_below is not None:
        ceiling = min(ceiling, exhaustive_below - 1)
    smaller = find_undetectable_logical(dem, ceiling) if ceiling >= 1 else None
    if smaller is not None:
        return CircuitDistance(distance=len(smaller), graphlike=graphlike, certified=True)
    certified = graphlike is not None and ceiling >= graphlike - 1
    logger.info(f"Circuit distance {graphlike} (certified={certified})")
    return CircuitDistance(distance=graphlike, graphlike=graphlike, certified=certified)


@dataclass(frozen=True)
class FaultCheckReport:
    """Faults (mechanism id tuples) decoded to the wrong observable flip."""

    order: int
    checked: int
    failures: Tuple[Tuple[int, ...], ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def _adjacent_pairs(dem: DetectorErrorModel) -> List[Tuple[int, int]]:
    """Mechanism pairs sharing a detector or joined by a graphlike mechanism."""
    neighbours: Dict[int, Set[int]] = {d: {d} for d in range(dem.num_detectors)}
    for _, m in dem.graphlike():
        if len(m.detectors) == 2:
            a, b = m.detectors
            neighbours[a].add(b)
            neighbours[b].add(a)
    by_detector: Dict[int, Set[int]] = {}
    for i, m in enumerate(dem.mechanisms):
        for d in m.detectors:
            by_detector.setdefault(d, set()).add(i)
    pairs: Set[Tuple[int, int]] = set()
    for i, m in enumerate(dem.mechanisms):
        near = set().union(*(neighbours[d] for d in m.detectors)) if m.detectors else set()
        for d in near:
            pairs.update((i, j) for j in by_detector.get(d, ()) if j > i)
    return sorted(pairs)


def verify_fault_correction(
    dem: DetectorErrorModel,
    decoder: Decoder,
    order: int = 1,
    sample_limit: Optional[int] = None,
    seed: Optional[int] = None,
) -> FaultCheckReport:
    """
    Decode every single mechanism (order 1) or every detector-adjacent
    mechanism pair (order 2) and report the faults predicted wrongly.

    Pairs are subsampled without replacement when there are more than
    ``sample_limit`` of them.
    """
    if order == 1:
        faults: List[Tuple[int, ...]] = [(i,) for i in range(len(dem))]
    elif order == 2:
        faults = list(_adjacent_pairs(dem))
        if sample_limit is not None and len(faults) > sample_limit:
            rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
            keep = np.sort(rng.choice(len(faults), size=sample_limit, replace=False))
            faults = [faults[k] for k in keep]
    else:
        raise ParameterError(f"order must be 1 or 2, got {order}")

    H = dem.check_matrix.T.tocsr()
    O = dem.observable_matrix.T.tocsr()
    failures: List[Tuple[int, ...]] = []
    batch = settings.SAMPLER_CHUNK_SHOTS
    for start in range(0, len(faults), batch):
        chunk = faults[start:start + batch]
        width = len(chunk[0]) if chunk else 0
        columns = [[fault[k] for fault in chunk] for k in range(width)]
        syndromes = np.zeros((len(chunk), dem.num_detectors), dtype=bool)
        actual = np.zeros((len(chunk), dem.num_observables), dtype=bool)
        for ids in columns:
            syndromes ^= H[ids].toarray().astype(bool)
            actual ^= O[ids].toarray().astype(bool)
        predicted = decoder.predict(syndromes)
        wrong = np.any(predicted != actual, axis=1)
        failures.extend(chunk[k] for k in np.flatnonzero(wrong))

    log = logger.warning if failures else logger.info
    log(f"Order-{order} fault check: {len(failures)} of {len(faults)} faults decoded wrongly")
    return FaultCheckReport(order=order, checked=len(faults), failures=tuple(failures))
