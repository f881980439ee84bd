"""
Flooding belief propagation over the circuit-level Tanner graph.

Messages live on the edges of the bipartite detector/mechanism graph and are
processed for a whole batch of syndromes at once: arrays are (batch, edges).
Check updates gather each check's edges into a padded (checks, max_degree)
layout and use exclusive prefix/suffix products, so a node of degree k costs
O(k) per iteration.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.special import expit

from app.core.config import get_settings
from app.core.exceptions import DimensionError, ParameterError
from app.schemas.decoder import BPConfig, BPVariant
from app.services.dem import DetectorErrorModel

logger = logging.getLogger(__name__)

settings = get_settings()


def llr(p: float, clamp: Optional[float] = None) -> float:
    """log((1 - p) / p), clamped to +-``clamp``."""
    if not 0.0 < p < 1.0:
        raise ParameterError(f"llr needs p in (0, 1), got {p}")
    clamp = settings.BP_LLR_CLAMP if clamp is None else clamp
    return float(np.clip(np.log1p(-p) - np.log(p), -clamp, clamp))


def prior_llrs(priors: np.ndarray, clamp: float) -> np.ndarray:
    floor = settings.MECHANISM_PROBABILITY_FLOOR
    p = np.clip(priors, floor, 1 - floor)
    return np.clip(np.log1p(-p) - np.log(p), -clamp, clamp)


@dataclass(frozen=True)
class TannerGraph:
    """Bipartite graph: one check per detector, one variable per mechanism."""

    num_checks: int
    num_variables: int
    priors: np.ndarray
    check_matrix: sparse.csr_matrix   # (checks, variables)
    edge_check: np.ndarray            # (edges,)
    edge_variable: np.ndarray         # (edges,)
    check_slots: np.ndarray           # (checks, max_degree) edge ids, -1 padded
    variable_sum: sparse.csr_matrix   # (variables, edges)

    @classmethod
    def from_dem(cls, dem: DetectorErrorModel) -> "TannerGraph":
        return cls.from_check_matrix(dem.check_matrix, dem.priors)

    @classmethod
    def from_check_matrix(cls, check_matrix, priors: np.ndarray) -> "TannerGraph":
        H = sparse.csr_matrix(check_matrix, dtype=np.uint8)
        num_checks, num_variables = H.shape
        priors = np.asarray(priors, dtype=float)
        if priors.shape != (num_variables,):
            raise DimensionError(f"{priors.shape[0]} priors for {num_variables} variables")
        coo = H.tocoo()
        order = np.lexsort((coo.col, coo.row))
        edge_check = coo.row[order].astype(np.intp)
        edge_variable = coo.col[order].astype(np.intp)
        num_edges = len(edge_check)

        degrees = np.bincount(edge_check, minlength=num_checks)
        width = int(degrees.max()) if num_checks and num_edges else 0
        slots = np.full((num_checks, width), -1, dtype=np.intp)
        starts = np.concatenate([[0], np.cumsum(degrees)[:-1]]) if num_checks else np.zeros(0, dtype=np.intp)
        position = np.arange(num_edges) - starts[edge_check] if num_edges else np.zeros(0, dtype=np.intp)
        slots[edge_check, position] = np.arange(num_edges)

        variable_sum = sparse.csr_matrix(
            (np.ones(num_edges), (edge_variable, np.arange(num_edges))), shape=(num_variables, num_edges)
        )
        return cls(
            num_checks=num_checks,
            num_variables=num_variables,
            priors=priors,
            check_matrix=H,
            edge_check=edge_check,
            edge_variable=edge_variable,
            check_slots=slots,
            variable_sum=variable_sum,
        )

    @property
    def num_edges(self) -> int:
        return len(self.edge_check)

    def syndrome_of(self, decisions: np.ndarray) -> np.ndarray:
        """H x mod 2 for a (batch, variables) boolean array."""
        return ((self.check_matrix @ decisions.T.astype(np.uint8)) & 1).astype(bool).T


@dataclass(frozen=True)
class BPResult:
    posteriors: np.ndarray
    llrs: np.ndarray
    hard_decisions: np.ndarray
    converged: bool
    iterations_used: int
    mean_posteriors: np.ndarray   # averaged over the iterations run


@dataclass(frozen=True)
class BPBatchResult:
    """Per-syndrome rows of :class:`BPResult` fields."""

    posteriors: np.ndarray
    llrs: np.ndarray
    hard_decisions: np.ndarray
    converged: np.ndarray
    iterations_used: np.ndarray
    mean_posteriors: np.ndarray

    def __getitem__(self, row: int) -> BPResult:
        return BPResult(
            posteriors=self.posteriors[row],
            llrs=self.llrs[row],
            hard_decisions=self.hard_decisions[row],
            converged=bool(self.converged[row]),
            iterations_used=int(self.iterations_used[row]),
            mean_posteriors=self.mean_posteriors[row],
        )

    def __len__(self) -> int:
        return len(self.converged)


def _gather(graph: TannerGraph, values: np.ndarray, pad: float) -> np.ndarray:
    """(batch, edges) -> (batch, checks, max_degree) with ``pad`` in empty slots."""
    slots = graph.check_slots
    gathered = values[:, np.where(slots >= 0, slots, 0)]
    gathered[:, slots < 0] = pad
    return gathered


def _scatter(graph: TannerGraph, gathered: np.ndarray) -> np.ndarray:
    valid = graph.check_slots >= 0
    out = np.empty((gathered.shape[0], graph.num_edges))
    out[:, graph.check_slots[valid]] = gathered[:, valid]
    return out


def _exclusive_products(t: np.ndarray) -> np.ndarray:
    ones = np.ones(t.shape[:-1] + (1,))
    prefix = np.concatenate([ones, np.cumprod(t, axis=-1)[..., :-1]], axis=-1)
    suffix = np.concatenate([np.cumprod(t[..., ::-1], axis=-1)[..., ::-1][..., 1:], ones], axis=-1)
    return prefix * suffix


def _sum_product_checks(graph: TannerGraph, to_check: np.ndarray, signs: np.ndarray, clamp: float) -> np.ndarray:
    t = _gather(graph, np.tanh(to_check / 2), pad=1.0)
    products = _exclusive_products(t) * signs[:, :, None]
    with np.errstate(divide="ignore"):
        messages = 2 * np.arctanh(np.clip(products, -1.0, 1.0))
    return np.clip(_scatter(graph, messages), -clamp, clamp)


def _min_sum_checks(
    graph: TannerGraph, to_check: np.ndarray, signs: np.ndarray, clamp: float, scale: float
) -> np.ndarray:
    magnitude = _gather(graph, np.abs(to_check), pad=np.inf)
    sign = _gather(graph, np.where(to_check < 0, -1.0, 1.0), pad=1.0)
    if magnitude.shape[-1] == 0:
        return np.zeros((to_check.shape[0], graph.num_edges))
    order = np.argsort(magnitude, axis=-1, kind="stable")
    first = np.take_along_axis(magnitude, order[..., :1], axis=-1)
    second = (
        np.take_along_axis(magnitude, order[..., 1:2], axis=-1)
        if magnitude.shape[-1] > 1
        else np.full_like(first, np.inf)
    )
    slot = np.arange(magnitude.shape[-1])
    excluded_min = np.where(slot == order[..., :1], second, first)
    total_sign = np.prod(sign, axis=-1, keepdims=True) * signs[:, :, None]
    messages = scale * total_sign * sign * np.minimum(excluded_min, clamp)
    return np.clip(_scatter(graph, messages), -clamp, clamp)


def run_bp_batch(
    graph: TannerGraph, syndromes: np.ndarray, config: Optional[BPConfig] = None
) -> BPBatchResult:
    """
    Decode a (batch, checks) array of syndromes.

    With ``early_stop`` each row stops at the first iteration whose hard
    decision reproduces its syndrome; otherwise every row runs ``max_iter``
    iterations and ``converged`` refers to the last one.

    ``mean_posteriors`` averages each row's posteriors over the iterations it
    ran. On loopy graphs a row that never converges tends to oscillate, and
    its last iteration can lose the evidence earlier iterations carried.
    """
    config = config or BPConfig()
    syndromes = np.atleast_2d(np.asarray(syndromes, dtype=bool))
    if syndromes.shape[1] != graph.num_checks:
        raise DimensionError(f"syndrome length {syndromes.shape[1]} != {graph.num_checks} checks")
    batch = syndromes.shape[0]
    clamp = config.llr_clamp
    prior = prior_llrs(graph.priors, clamp)

    llrs = np.tile(prior, (batch, 1))
    decisions = llrs <= 0
    converged = np.zeros(batch, dtype=bool)
    iterations = np.zeros(batch, dtype=np.int64)
    posterior_sum = np.zeros_like(llrs)

    live = np.arange(batch)
    to_check = np.tile(prior[graph.edge_variable], (batch, 1))
    signs_all = np.where(syndromes, -1.0, 1.0)
    for iteration in range(1, config.max_iter + 1):
        signs = signs_all[live]
        if graph.num_edges == 0:
            to_variable = np.zeros((live.size, 0))
        elif config.variant == BPVariant.MIN_SUM:
            to_variable = _min_sum_checks(graph, to_check, signs, clamp, config.min_sum_scale)
        else:
            to_variable = _sum_product_checks(graph, to_check, signs, clamp)
        q = np.clip(prior + (graph.variable_sum @ to_variable.T).T, -clamp, clamp)
        x = q <= 0
        satisfied = np.all(graph.syndrome_of(x) == syndromes[live], axis=1)

        llrs[live] = q
        posterior_sum[live] += expit(-q)
        decisions[live] = x
        iterations[live] = iteration
        converged[live] = satisfied
        if config.early_stop:
            keep = ~satisfied
            live = live[keep]
            if live.size == 0:
                break
            to_check = np.clip(q[keep][:, graph.edge_variable] - to_variable[keep], -clamp, clamp)
        else:
            to_check = np.clip(q[:, graph.edge_variable] - to_variable, -clamp, clamp)

    logger.debug(
        f"BP on {batch} syndromes: {int(converged.sum())} converged, "
        f"mean iterations {iterations.mean() if batch else 0:.2f}"
    )
    return BPBatchResult(
        posteriors=expit(-llrs),
        llrs=llrs,
        hard_decisions=decisions,
        converged=converged,
        iterations_used=iterations,
        mean_posteriors=posterior_sum / np.maximum(iterations, 1)[:, None],
    )


def run_bp(graph: TannerGraph, syndrome: np.ndarray, config: Optional[BPConfig] = None) -> BPResult:
    syndrome = np.asarray(syndrome, dtype=bool)
    if syndrome.ndim != 1:
        raise DimensionError("run_bp takes a single syndrome vector")
    return run_bp_batch(graph, syndrome[None, :], config)[0]
