"""
Weighted union-find decoding on the split-edge matching graph.

Weights are discretized so the smallest positive weight becomes
UF_MIN_WEIGHT_UNITS (capped at UF_MAX_WEIGHT_UNITS). Each growth round,
every odd cluster (smallest first) adds one unit of support to each edge on
its frontier, so an edge grown from both ends fills twice as fast. An edge
whose support reaches its weight fuses its endpoints immediately, and a
cluster that turns even (or touches the boundary) stops growing for the rest
of the round. Runs of rounds in which no edge fills are applied in one step
sized by the smallest remaining frontier slack, so growth costs scale with the
number of fusions rather than with the weights. Zero-weight edges start out
grown. The correction is peeled
from a BFS spanning forest of the grown edges.
"""
from __future__ import annotations

import logging
from collections import deque
from typing import Dict, List, Optional, Set

import numpy as np

from app.core.config import get_settings
from app.core.exceptions import InfeasibleSyndromeError
from app.services.matching_graph import MatchingGraph
from app.services.mwpm import MatchingResult

logger = logging.getLogger(__name__)

settings = get_settings()


def discretize_weights(
    weights: np.ndarray, min_units: Optional[int] = None, max_units: Optional[int] = None
) -> np.ndarray:
    min_units = settings.UF_MIN_WEIGHT_UNITS if min_units is None else min_units
    max_units = settings.UF_MAX_WEIGHT_UNITS if max_units is None else max_units
    positive = weights > 0
    units = np.zeros(len(weights), dtype=np.int64)
    if positive.any():
        scale = min_units / weights[positive].min()
        units[positive] = np.minimum(np.rint(weights[positive] * scale), max_units).astype(np.int64)
        units[positive] = np.maximum(units[positive], 1)
    return units


class _Clusters:
    """Union-find forest with per-root parity, boundary flag and member list."""

    def __init__(self, num_nodes: int, boundary: int, defects: np.ndarray):
        self.parent = list(range(num_nodes))
        self.members: Dict[int, List[int]] = {}
        self.odd = [False] * num_nodes
        self.touches_boundary = [False] * num_nodes
        self.touches_boundary[boundary] = True
        for d in defects:
            self.odd[int(d)] = True

    def find(self, node: int) -> int:
        # path splitting
        while self.parent[node] != node:
            self.parent[node], node = self.parent[self.parent[node]], self.parent[node]
        return node

    def nodes(self, root: int) -> List[int]:
        return self.members.get(root, [root])

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if len(self.nodes(ra)) < len(self.nodes(rb)) or (
            len(self.nodes(ra)) == len(self.nodes(rb)) and rb < ra
        ):
            ra, rb = rb, ra
        self.parent[rb] = ra
        # the smaller member list is appended onto the larger one in place
        self.members.setdefault(ra, [ra]).extend(self.members.pop(rb, [rb]))
        self.odd[ra] ^= self.odd[rb]
        self.touches_boundary[ra] = self.touches_boundary[ra] or self.touches_boundary[rb]
        return ra

    def is_active(self, root: int) -> bool:
        return self.odd[root] and not self.touches_boundary[root]


class UnionFindMatcher:
    """Union-find decoder bound to one (possibly reweighted) matching graph."""

    def __init__(self, graph: MatchingGraph):
        self.graph = graph
        self.units = discretize_weights(graph.weights)
        self.incident: List[List[int]] = [[] for _ in range(graph.num_nodes)]
        for e, (u, v) in enumerate(zip(graph.edge_u, graph.edge_v)):
            self.incident[int(u)].append(e)
            self.incident[int(v)].append(e)

    def _grow(self, clusters: _Clusters, grown: np.ndarray, defects: np.ndarray) -> int:
        graph = self.graph
        support = np.zeros(graph.num_edges, dtype=np.int64)
        for e in np.flatnonzero(grown):
            clusters.union(int(graph.edge_u[e]), int(graph.edge_v[e]))

        steps = 0
        while True:
            roots = {clusters.find(int(d)) for d in defects}
            active = sorted(
                (r for r in roots if clusters.is_active(r)),
                key=lambda r: (len(clusters.nodes(r)), r),
            )
            if not active:
                return steps
            steps += self._skip_idle_rounds(clusters, grown, support, active)
            progressed = False
            for root in active:
                root = clusters.find(root)
                if not clusters.is_active(root):
                    continue
                steps += 1
                frontier: Set[int] = set()
                for node in clusters.nodes(root):
                    frontier.update(e for e in self.incident[node] if not grown[e])
                for e in sorted(frontier):
                    if grown[e]:
                        continue
                    progressed = True
                    support[e] += 1
                    if support[e] >= self.units[e]:
                        grown[e] = True
                        clusters.union(int(graph.edge_u[e]), int(graph.edge_v[e]))
            if not progressed:
                raise InfeasibleSyndromeError("an odd cluster can grow no further and reaches no boundary")

    def _skip_idle_rounds(
        self, clusters: _Clusters, grown: np.ndarray, support: np.ndarray, active: List[int]
    ) -> int:
        """
        Advance support by every whole round in which no frontier edge fills.

        Each active cluster adds one unit per round to each ungrown edge next to
        it, so an edge with ``slack`` units left and ``k`` active neighbours fills
        in ceil(slack / k) rounds. All rounds before the first fill leave the
        clusters unchanged and are applied at once. Returns the cluster growth
        steps they stand for.
        """
        rate: Dict[int, int] = {}
        for root in active:
            frontier = {e for node in clusters.nodes(root) for e in self.incident[node] if not grown[e]}
            for e in frontier:
                rate[e] = rate.get(e, 0) + 1
        if not rate:
            return 0
        edges = np.fromiter(rate.keys(), dtype=np.intp, count=len(rate))
        per_round = np.fromiter(rate.values(), dtype=np.int64, count=len(rate))
        slack = self.units[edges] - support[edges]
        idle = int(np.min(-(-slack // per_round))) - 1
        if idle <= 0:
            return 0
        support[edges] += idle * per_round
        return idle * len(active)

    def _peel(self, clusters: _Clusters, grown: np.ndarray, defects: np.ndarray) -> List[int]:
        graph = self.graph
        neighbours: Dict[int, List[tuple]] = {}
        for e in np.flatnonzero(grown):
            u, v = int(graph.edge_u[e]), int(graph.edge_v[e])
            neighbours.setdefault(u, []).append((v, int(e)))
            neighbours.setdefault(v, []).append((u, int(e)))
        for adjacent in neighbours.values():
            adjacent.sort()

        marked = np.zeros(graph.num_nodes, dtype=bool)
        marked[defects] = True
        visited = np.zeros(graph.num_nodes, dtype=bool)
        correction: List[int] = []

        roots = sorted({clusters.find(int(d)) for d in defects})
        for root in roots:
            nodes = clusters.nodes(root)
            start = graph.boundary if clusters.touches_boundary[root] else min(nodes)
            if visited[start]:
                continue
            order, parent_edge = [start], {start: (-1, -1)}
            visited[start] = True
            queue = deque([start])
            while queue:
                node = queue.popleft()
                for other, e in neighbours.get(node, ()):
                    if not visited[other]:
                        visited[other] = True
                        parent_edge[other] = (node, e)
                        order.append(other)
                        queue.append(other)
            for node in reversed(order[1:]):
                if marked[node]:
                    parent, e = parent_edge[node]
                    correction.append(e)
                    marked[node] = False
                    marked[parent] ^= True
        return correction

    def decode(self, syndrome: np.ndarray) -> MatchingResult:
        defects = np.flatnonzero(np.asarray(syndrome, dtype=bool))
        if defects.size == 0:
            return MatchingResult(edges=(), weight=0.0)
        clusters = _Clusters(self.graph.num_nodes, self.graph.boundary, defects)
        grown = self.units == 0
        steps = self._grow(clusters, grown, defects)
        edges = tuple(sorted(self._peel(clusters, grown, defects)))
        return MatchingResult(edges=edges, weight=self.graph.total_weight(edges), clusters_grown=steps)


def uf_decode(graph: MatchingGraph, syndrome: np.ndarray) -> MatchingResult:
    """Weighted union-find correction for ``syndrome``."""
    return UnionFindMatcher(graph).decode(syndrome)
