"""
Matching graph over detectors plus one virtual boundary node.

Every graphlike detector set of a decomposed DEM becomes one edge; parallel
mechanisms on the same detector set share the edge. Edge weights are
w(e) = -log p_w(e) with p_w(e) = min(1, p(e) + sum of the probabilities of
the hyperedges decomposed onto e), where p(e) is the largest probability
among the edge's own mechanisms. The same rule builds the graph from priors
and reweights it from BP posteriors.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import sparse

from app.core.exceptions import ParameterError
from app.services.dem import DetectorErrorModel

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class _EdgeStructure:
    """Mechanism-to-edge bookkeeping shared by a graph and its reweighted copies."""

    member_edge: np.ndarray         # (members,) edge of each graphlike mechanism
    member_mechanism: np.ndarray    # (members,)
    hyperedge_incidence: sparse.csr_matrix  # (edges, mechanisms), 1 where a hyperedge part lies on the edge
    mechanism_observables: np.ndarray       # (mechanisms, observables) bool


@dataclass(frozen=True)
class MatchingGraph:
    num_detectors: int
    num_observables: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    probabilities: np.ndarray
    weights: np.ndarray
    observables: np.ndarray   # (edges, observables) bool
    sources: np.ndarray       # (edges,) mechanism chosen for the edge
    structure: _EdgeStructure = field(repr=False, compare=False)

    @property
    def boundary(self) -> int:
        return self.num_detectors

    @property
    def num_nodes(self) -> int:
        return self.num_detectors + 1

    @property
    def num_edges(self) -> int:
        return len(self.edge_u)

    @cached_property
    def edge_lookup(self) -> Dict[Tuple[int, int], int]:
        return {(int(u), int(v)): e for e, (u, v) in enumerate(zip(self.edge_u, self.edge_v))}

    def edge_index(self, u: int, v: int) -> int:
        return self.edge_lookup[(min(u, v), max(u, v))]

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric weighted adjacency; zero weights stored as the smallest positive float."""
        w = np.where(self.weights > 0, self.weights, _TINY)
        rows = np.concatenate([self.edge_u, self.edge_v])
        cols = np.concatenate([self.edge_v, self.edge_u])
        return sparse.csr_matrix(
            (np.concatenate([w, w]), (rows, cols)), shape=(self.num_nodes, self.num_nodes)
        )

    def syndrome_of(self, edges: Sequence[int]) -> np.ndarray:
        """Detectors at odd-degree endpoints of an edge set (boundary excluded)."""
        bits = np.zeros(self.num_nodes, dtype=bool)
        for e in edges:
            bits[self.edge_u[e]] ^= True
            bits[self.edge_v[e]] ^= True
        return bits[: self.num_detectors]

    def observable_flips(self, edges: Sequence[int]) -> np.ndarray:
        if len(edges) == 0:
            return np.zeros(self.num_observables, dtype=bool)
        return np.bitwise_xor.reduce(self.observables[list(edges)], axis=0)

    def total_weight(self, edges: Sequence[int]) -> float:
        return float(self.weights[list(edges)].sum()) if len(edges) else 0.0


def _edge_key(detectors: Tuple[int, ...], boundary: int) -> Tuple[int, int]:
    if len(detectors) == 1:
        return (detectors[0], boundary)
    return detectors  # type: ignore[return-value]


def build_matching_graph(dem: DetectorErrorModel) -> MatchingGraph:
    """
    One edge per graphlike detector set, weighted from the DEM priors.

    Raises:
        ParameterError: if the DEM still holds undecomposed hyperedges
    """
    if not dem.is_decomposed:
        raise ParameterError("build_matching_graph needs a decomposed DEM")
    boundary = dem.num_detectors
    keys: Dict[Tuple[int, int], int] = {}
    member_edge, member_mechanism = [], []
    for index, m in dem.graphlike():
        if not m.detectors:
            continue
        key = _edge_key(m.detectors, boundary)
        edge = keys.setdefault(key, len(keys))
        member_edge.append(edge)
        member_mechanism.append(index)

    rows, cols = [], []
    for index, m in dem.hyperedges():
        for detectors, _ in m.decomposition:
            key = _edge_key(detectors, boundary)
            if key not in keys:
                raise ParameterError(f"hyperedge {m.detectors} has part {detectors} with no graphlike mechanism")
            rows.append(keys[key])
            cols.append(index)
    incidence = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(keys), len(dem.mechanisms))
    )
    mechanism_observables = np.asarray(dem.observable_matrix.T.todense(), dtype=bool).reshape(
        len(dem.mechanisms), dem.num_observables
    )
    endpoints = np.array(sorted(keys, key=keys.get), dtype=np.intp).reshape(-1, 2)
    structure = _EdgeStructure(
        member_edge=np.asarray(member_edge, dtype=np.intp),
        member_mechanism=np.asarray(member_mechanism, dtype=np.intp),
        hyperedge_incidence=incidence,
        mechanism_observables=mechanism_observables,
    )
    empty = np.zeros(len(keys))
    graph = MatchingGraph(
        num_detectors=dem.num_detectors,
        num_observables=dem.num_observables,
        edge_u=endpoints[:, 0],
        edge_v=endpoints[:, 1],
        probabilities=empty,
        weights=empty,
        observables=np.zeros((len(keys), dem.num_observables), dtype=bool),
        sources=np.zeros(len(keys), dtype=np.intp),
        structure=structure,
    )
    return reweight(graph, dem.priors)


def reweight(graph: MatchingGraph, posteriors: np.ndarray) -> MatchingGraph:
    """New weights from per-mechanism probabilities (priors or BP posteriors)."""
    s = graph.structure
    posteriors = np.asarray(posteriors, dtype=float)
    if posteriors.shape != (s.mechanism_observables.shape[0],):
        raise ParameterError(f"expected {s.mechanism_observables.shape[0]} posteriors, got {posteriors.shape}")
    order = np.lexsort((s.member_mechanism, -posteriors[s.member_mechanism], s.member_edge))
    edges_sorted = s.member_edge[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = edges_sorted[1:] != edges_sorted[:-1]
    chosen = s.member_mechanism[order][first]

    adjusted = posteriors[chosen] + s.hyperedge_incidence @ posteriors
    p_w = np.clip(adjusted, _TINY, 1.0)
    return replace(
        graph,
        probabilities=p_w,
        weights=-np.log(p_w),
        observables=s.mechanism_observables[chosen],
        sources=chosen,
    )
