"""Exact minimum-weight perfect matching of detection events."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import List, Tuple

import networkx as nx
import numpy as np
from scipy.sparse.csgraph import dijkstra

from app.core.exceptions import InfeasibleSyndromeError
from app.services.matching_graph import MatchingGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchingResult:
    """Correction edges (odd multiplicity after path cancellation) and their total weight."""

    edges: Tuple[int, ...]
    weight: float
    clusters_grown: int = 0


def _path_edges(graph: MatchingGraph, predecessors: np.ndarray, source: int, target: int) -> List[int]:
    edges = []
    node = target
    while node != source:
        previous = int(predecessors[node])
        if previous < 0:
            raise InfeasibleSyndromeError(f"no path from detector {source} to node {target}")
        edges.append(graph.edge_index(previous, node))
        node = previous
    return edges


def mwpm_decode(graph: MatchingGraph, syndrome: np.ndarray) -> MatchingResult:
    """
    Minimum-weight correction for a syndrome.

    Shortest paths from every defect give a complete graph over the defects;
    each defect also gets a private boundary image at its boundary distance,
    and the images form a zero-weight clique so unused images pair up. The
    perfect matching of minimum total weight is found with the blossom
    algorithm as a maximum-weight matching of C - w.

    Raises:
        InfeasibleSyndromeError: if no perfect matching exists
    """
    defects = np.flatnonzero(np.asarray(syndrome, dtype=bool))
    k = len(defects)
    if k == 0:
        return MatchingResult(edges=(), weight=0.0)

    distances, predecessors = dijkstra(
        graph.adjacency, directed=False, indices=defects, return_predecessors=True
    )
    to_boundary = distances[:, graph.boundary]
    candidates: List[Tuple[int, int, float]] = []
    for i in range(k):
        if np.isfinite(to_boundary[i]):
            candidates.append((i, k + i, to_boundary[i]))
        for j in range(i + 1, k):
            d = distances[i, defects[j]]
            if not np.isfinite(d):
                continue
            # a pair never beats both defects taking the boundary
            if d >= to_boundary[i] + to_boundary[j]:
                continue
            candidates.append((i, j, d))
    for i in range(k):
        for j in range(i + 1, k):
            candidates.append((k + i, k + j, 0.0))

    ceiling = 1.0 + max(c[2] for c in candidates) if candidates else 1.0
    matcher = nx.Graph()
    matcher.add_nodes_from(range(2 * k))
    matcher.add_weighted_edges_from((a, b, ceiling - w) for a, b, w in candidates)
    matching = nx.max_weight_matching(matcher, maxcardinality=True)
    if len(matching) != k:
        raise InfeasibleSyndromeError(
            f"no perfect matching for {k} defects; some defect reaches neither a partner nor the boundary"
        )

    used: Counter = Counter()
    for a, b in matching:
        a, b = min(a, b), max(a, b)
        if a >= k:
            continue
        target = graph.boundary if b >= k else int(defects[b])
        used.update(_path_edges(graph, predecessors[a], int(defects[a]), target))
    edges = tuple(sorted(e for e, count in used.items() if count % 2))
    return MatchingResult(edges=edges, weight=graph.total_weight(edges))
