"""
Qubit overhead needed to reach a target logical error rate, from the fitted
below-threshold ansatze.

A d_x by d_z patch uses 2 d_x d_z - 1 qubits. XY codes need
p_log <= target; CSS codes (square or rectangular) need
p_log^X + p_log^Z <= target with r = max(d_x, d_z) rounds.
"""
from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, root

from app.core.config import get_settings
from app.core.exceptions import OverheadRangeError, ParameterError
from app.schemas.analysis import AnsatzFamily, AnsatzFit, OverheadCurvePoint, OverheadFamily, OverheadSolution
from app.services.ansatz import log_logical_rate, logical_rate
from app.services.coefficients import get_coefficient_service
from app.services.noise import p_from_cnot_infidelity

logger = logging.getLogger(__name__)

settings = get_settings()

DEFAULT_TARGET = 1e-12
DEFAULT_ETA = 100.0

Fits = Dict[AnsatzFamily, AnsatzFit]


def qubit_count(d_x: float, d_z: float) -> float:
    return 2 * d_x * d_z - 1


def _odd_sizes(max_distance: int) -> range:
    return range(3, max_distance + 1, 2)


def _css_rate(fits: Fits, p: float, d_x: float, d_z: float) -> float:
    r = max(d_x, d_z)
    return logical_rate(fits[AnsatzFamily.RECT_X], p, d_x, d_z, r) + logical_rate(
        fits[AnsatzFamily.RECT_Z], p, d_x, d_z, r
    )


def _solve_xy(fits: Fits, p: float, target: float, max_distance: int) -> Tuple[int, int, float]:
    fit = fits[AnsatzFamily.XY]
    for L in _odd_sizes(max_distance):
        rate = logical_rate(fit, p, L)
        if rate <= target:
            return L, L, rate
    raise OverheadRangeError(f"xy target {target:g} unreachable below L={max_distance} at p={p:.4g}")


def _solve_square(fits: Fits, p: float, target: float, max_distance: int) -> Tuple[int, int, float]:
    for L in _odd_sizes(max_distance):
        rate = _css_rate(fits, p, L, L)
        if rate <= target:
            return L, L, rate
    raise OverheadRangeError(f"square CSS target {target:g} unreachable below L={max_distance} at p={p:.4g}")


def _solve_rectangular(fits: Fits, p: float, target: float, max_distance: int) -> Tuple[int, int, float]:
    best: Optional[Tuple[float, int, int, float]] = None
    for d_x in _odd_sizes(max_distance):
        for d_z in _odd_sizes(max_distance):
            qubits = qubit_count(d_x, d_z)
            if best is not None and qubits > best[0]:
                break
            rate = _css_rate(fits, p, d_x, d_z)
            if rate <= target:
                # d_x ascends, so strict improvement keeps the smaller d_x on ties
                if best is None or qubits < best[0]:
                    best = (qubits, d_x, d_z, rate)
                break
    if best is None:
        raise OverheadRangeError(f"rectangular CSS target {target:g} unreachable below {max_distance}x{max_distance}")
    return best[1], best[2], best[3]


def _continuous_square(fits: Fits, family: OverheadFamily, p: float, target: float, guess: int) -> float:
    if family is OverheadFamily.XY:
        gap = lambda L: log_logical_rate(fits[AnsatzFamily.XY], p, L) - math.log(target)
    else:
        gap = lambda L: math.log(_css_rate(fits, p, L, L)) - math.log(target)
    lo, hi = 1.0, float(guess)
    if gap(lo) <= 0:
        return lo
    return float(brentq(gap, lo, hi))


def _continuous_rectangular(fits: Fits, p: float, target: float, guess: Tuple[int, int]) -> Tuple[float, float]:
    half = math.log(target / 2)

    def equations(dims: np.ndarray) -> List[float]:
        d_x, d_z = np.maximum(dims, 1.0)
        r = max(d_x, d_z)
        return [
            log_logical_rate(fits[AnsatzFamily.RECT_X], p, d_x, d_z, r) - half,
            log_logical_rate(fits[AnsatzFamily.RECT_Z], p, d_x, d_z, r) - half,
        ]

    solution = root(equations, x0=np.array(guess, dtype=float), method="hybr")
    if not solution.success:
        logger.warning(f"Continuous rectangular relaxation did not converge: {solution.message}")
        return float(guess[0]), float(guess[1])
    d_x, d_z = np.maximum(solution.x, 1.0)
    return float(d_x), float(d_z)


def _resolve_p(fits: Fits, p: Optional[float], p_cx: Optional[float], eta: Optional[float]) -> float:
    if (p is None) == (p_cx is None):
        raise ParameterError("pass exactly one of p or p_cx")
    if p is not None:
        return p
    if eta is None:
        etas = {fit.eta for fit in fits.values() if fit.eta is not None}
        eta = etas.pop() if len(etas) == 1 else DEFAULT_ETA
    return p_from_cnot_infidelity(p_cx, eta)


def solve_overhead(
    family: OverheadFamily | str,
    p: Optional[float] = None,
    p_cx: Optional[float] = None,
    target: float = DEFAULT_TARGET,
    fits: Optional[Fits] = None,
    eta: Optional[float] = None,
    max_distance: Optional[int] = None,
) -> OverheadSolution:
    """
    Smallest odd layout reaching ``target`` plus the continuous relaxation.

    The noise strength is ``p`` directly, or ``p_cx`` converted with the bias
    of the fits (``eta`` overrides it). ``fits`` defaults to the bundled
    reference coefficients.

    Raises:
        ParameterError: neither or both of p and p_cx, or target outside (0, 1)
        OverheadRangeError: unreachable below ``OVERHEAD_MAX_DISTANCE``
    """
    family = OverheadFamily(family)
    if not 0.0 < target < 1.0:
        raise ParameterError(f"target must lie in (0, 1), got {target}")
    fits = fits or get_coefficient_service().all()
    p = _resolve_p(fits, p, p_cx, eta)
    if p <= 0:
        raise ParameterError(f"p must be positive, got {p}")
    max_distance = max_distance or settings.OVERHEAD_MAX_DISTANCE

    if family is OverheadFamily.XY:
        d_x, d_z, rate = _solve_xy(fits, p, target, max_distance)
    elif family is OverheadFamily.SQUARE:
        d_x, d_z, rate = _solve_square(fits, p, target, max_distance)
    else:
        d_x, d_z, rate = _solve_rectangular(fits, p, target, max_distance)

    if family is OverheadFamily.RECTANGULAR:
        c_x, c_z = _continuous_rectangular(fits, p, target, (d_x, d_z))
    else:
        c_x = c_z = _continuous_square(fits, family, p, target, d_x)

    solution = OverheadSolution(
        family=family,
        p=p,
        target=target,
        d_x=d_x,
        d_z=d_z,
        rounds=max(d_x, d_z),
        qubits=int(qubit_count(d_x, d_z)),
        aspect_ratio=d_z / d_x,
        continuous_d_x=c_x,
        continuous_d_z=c_z,
        continuous_qubits=qubit_count(c_x, c_z),
        continuous_aspect_ratio=c_z / c_x,
        logical_error_rate=rate,
    )
    logger.info(f"{family.value} overhead at p={p:.4g}: {d_x}x{d_z}, {solution.qubits} qubits")
    return solution


def overhead_curve(
    p_cx_values: Sequence[float],
    target: float = DEFAULT_TARGET,
    fits: Optional[Fits] = None,
    eta: Optional[float] = None,
    families: Sequence[OverheadFamily] = tuple(OverheadFamily),
) -> List[OverheadCurvePoint]:
    """Qubit counts per family over a p_CX range; unreachable entries are None."""
    fits = fits or get_coefficient_service().all()
    curve = []
    for p_cx in p_cx_values:
        qubits: Dict[OverheadFamily, Optional[int]] = {}
        smooth: Dict[OverheadFamily, Optional[float]] = {}
        for family in families:
            try:
                solution = solve_overhead(family, p_cx=p_cx, target=target, fits=fits, eta=eta)
            except OverheadRangeError:
                qubits[family] = smooth[family] = None
                continue
            qubits[family] = solution.qubits
            smooth[family] = solution.continuous_qubits
        curve.append(OverheadCurvePoint(p_cx=p_cx, qubits=qubits, continuous_qubits=smooth))
    return curve
