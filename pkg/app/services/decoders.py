"""
Decoders over a decomposed detector error model.

``MatchingDecoder`` runs MWPM or weighted union-find on the prior-weighted
matching graph. ``BeliefDecoder`` runs BP first. A converged hard decision is
pruned to its cheapest subset with the same syndrome and returned; otherwise
the matching graph is reweighted from the BP posteriors averaged over all
iterations and handed to the matcher.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from app.core.config import get_settings
from app.core.exceptions import CorrectionMismatchError, DimensionError, ParameterError
from app.schemas.decoder import BPConfig, DecoderName, DecoderSpec
from app.services.bp import BPResult, TannerGraph, run_bp_batch
from app.services.dem import DetectorErrorModel
from app.services.matching_graph import MatchingGraph, build_matching_graph, reweight
from app.services.mwpm import MatchingResult, mwpm_decode
from app.services.union_find import UnionFindMatcher, uf_decode

logger = logging.getLogger(__name__)

settings = get_settings()


@dataclass(frozen=True)
class DecodeOutcome:
    """Predicted observable flips plus the correction behind them."""

    predicted: np.ndarray
    correction: Tuple[int, ...] = ()
    edges: Tuple[int, ...] = ()
    bp_converged: Optional[bool] = None
    bp_iterations: int = 0
    matched_weight: Optional[float] = None
    clusters_grown: int = 0


class Decoder(ABC):
    """Shared checks and batch loop."""

    def __init__(self, dem: DetectorErrorModel, validate: Optional[bool] = None):
        self.dem = dem
        self.validate = settings.validate_corrections if validate is None else validate

    def _check_length(self, syndromes: np.ndarray) -> np.ndarray:
        syndromes = np.atleast_2d(np.asarray(syndromes, dtype=bool))
        if syndromes.shape[1] != self.dem.num_detectors:
            raise DimensionError(
                f"syndrome length {syndromes.shape[1]} != {self.dem.num_detectors} detectors"
            )
        return syndromes

    def _empty(self) -> DecodeOutcome:
        return DecodeOutcome(predicted=np.zeros(self.dem.num_observables, dtype=bool))

    def decode(self, syndrome: np.ndarray) -> DecodeOutcome:
        return self.decode_batch(self._check_length(syndrome))[0]

    @abstractmethod
    def decode_batch(self, syndromes: np.ndarray) -> List[DecodeOutcome]:
        ...

    def predict(self, syndromes: np.ndarray) -> np.ndarray:
        """(shots, observables) predicted flips."""
        outcomes = self.decode_batch(syndromes)
        if not outcomes:
            return np.zeros((0, self.dem.num_observables), dtype=bool)
        return np.vstack([o.predicted for o in outcomes])


class MatchingDecoder(Decoder):
    def __init__(
        self,
        dem: DetectorErrorModel,
        matcher: DecoderName = DecoderName.MWPM,
        validate: Optional[bool] = None,
    ):
        super().__init__(dem, validate)
        self.matcher_name = DecoderName(matcher).matcher
        self.graph = build_matching_graph(dem)
        self._uf = UnionFindMatcher(self.graph) if self.matcher_name is DecoderName.UF else None

    def _match(self, graph: MatchingGraph, syndrome: np.ndarray, reuse: bool) -> MatchingResult:
        if self.matcher_name is DecoderName.UF:
            return self._uf.decode(syndrome) if reuse else uf_decode(graph, syndrome)
        return mwpm_decode(graph, syndrome)

    def _outcome(self, graph: MatchingGraph, syndrome: np.ndarray, result: MatchingResult, **telemetry) -> DecodeOutcome:
        if self.validate and not np.array_equal(graph.syndrome_of(result.edges), syndrome):
            raise CorrectionMismatchError(
                f"{self.matcher_name.value} correction {result.edges} does not reproduce the syndrome"
            )
        return DecodeOutcome(
            predicted=graph.observable_flips(result.edges),
            correction=tuple(int(graph.sources[e]) for e in result.edges),
            edges=result.edges,
            matched_weight=result.weight,
            clusters_grown=result.clusters_grown,
            **telemetry,
        )

    def decode_batch(self, syndromes: np.ndarray) -> List[DecodeOutcome]:
        syndromes = self._check_length(syndromes)
        outcomes = []
        for syndrome in syndromes:
            if not syndrome.any():
                outcomes.append(self._empty())
                continue
            result = self._match(self.graph, syndrome, reuse=True)
            outcomes.append(self._outcome(self.graph, syndrome, result))
        return outcomes


class BeliefDecoder(MatchingDecoder):
    """Belief-matching (MWPM back end) or belief-find (union-find back end)."""

    def __init__(
        self,
        dem: DetectorErrorModel,
        matcher: DecoderName = DecoderName.MWPM,
        bp: Optional[BPConfig] = None,
        validate: Optional[bool] = None,
    ):
        super().__init__(dem, matcher, validate)
        self.bp = bp or BPConfig()
        self.tanner = TannerGraph.from_dem(dem)

    def _from_bp(self, syndrome: np.ndarray, result: BPResult) -> DecodeOutcome:
        # a converged decision may carry a zero-syndrome loop that flips an observable
        chosen = self.dem.lightest_equivalent(np.flatnonzero(result.hard_decisions))
        if self.validate and not np.array_equal(self.dem.syndrome(chosen), syndrome):
            raise CorrectionMismatchError("converged BP hard decision does not reproduce the syndrome")
        return DecodeOutcome(
            predicted=self.dem.observable_flips(chosen),
            correction=chosen,
            bp_converged=True,
            bp_iterations=result.iterations_used,
        )

    def decode_batch(self, syndromes: np.ndarray) -> List[DecodeOutcome]:
        syndromes = self._check_length(syndromes)
        outcomes: List[Optional[DecodeOutcome]] = [None] * len(syndromes)
        busy = np.flatnonzero(syndromes.any(axis=1))
        for row in np.flatnonzero(~syndromes.any(axis=1)):
            outcomes[row] = self._empty()
        if busy.size:
            results = run_bp_batch(self.tanner, syndromes[busy], self.bp)
            for k, row in enumerate(busy):
                result = results[k]
                if result.converged:
                    outcomes[row] = self._from_bp(syndromes[row], result)
                    continue
                graph = reweight(self.graph, result.mean_posteriors)
                matched = self._match(graph, syndromes[row], reuse=False)
                outcomes[row] = self._outcome(
                    graph,
                    syndromes[row],
                    matched,
                    bp_converged=False,
                    bp_iterations=result.iterations_used,
                )
        return outcomes  # type: ignore[return-value]


def build_decoder(
    dem: DetectorErrorModel,
    spec: Union[DecoderSpec, DecoderName, str] = DecoderName.MWPM,
    validate: Optional[bool] = None,
) -> Decoder:
    """Decoder for a decomposed DEM by name: mwpm, uf, belief-matching or belief-find."""
    if not isinstance(spec, DecoderSpec):
        try:
            spec = DecoderSpec(name=DecoderName(spec))
        except ValueError as e:
            raise ParameterError(f"unknown decoder {spec!r}") from e
    name = DecoderName(spec.name)
    if name.uses_bp:
        return BeliefDecoder(dem, name.matcher, spec.bp, validate)
    return MatchingDecoder(dem, name, validate)


def belief_decode(
    dem: DetectorErrorModel,
    syndrome: np.ndarray,
    matcher: DecoderName = DecoderName.MWPM,
    bp: Optional[BPConfig] = None,
) -> DecodeOutcome:
    """One-shot belief-matching / belief-find decode."""
    return BeliefDecoder(dem, matcher, bp).decode(syndrome)
