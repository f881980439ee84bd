"""
Below-threshold scaling ansatze and their fits.

    xy:      p_log   = a (b p)^((sqrt(n) + 1) / 2)
    rect_x:  p_log^X = a r d_z / d_x^2 (b p)^((d_x + 1) / 2)
    rect_z:  p_log^Z = a r d_x / d_z^2 (b p)^((d_z + 1) / 2)

with p the noise strength, n the number of data qubits and r the number of
syndrome rounds. Fits are done in log space, where every family is
log p_log = log a + log(prefactor) + k (log b + log p).
"""
from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import curve_fit

from app.core.exceptions import FitError, ParameterError
from app.schemas.analysis import AnsatzFamily, AnsatzFit, ExponentFit
from app.schemas.experiment import MonteCarloPoint

logger = logging.getLogger(__name__)

MIN_SIZES = 3


def exponent_and_prefactor(
    family: AnsatzFamily, d_x: float, d_z: float, rounds: Optional[float] = None
) -> Tuple[float, float]:
    """(k, prefactor) of ``family`` at the given (possibly non-integer) dimensions."""
    family = AnsatzFamily(family)
    rounds = max(d_x, d_z) if rounds is None else rounds
    if family is AnsatzFamily.XY:
        return (math.sqrt(d_x * d_z) + 1) / 2, 1.0
    if family is AnsatzFamily.RECT_X:
        return (d_x + 1) / 2, rounds * d_z / d_x ** 2
    return (d_z + 1) / 2, rounds * d_x / d_z ** 2


def logical_rate(
    fit: AnsatzFit, p: float, d_x: float, d_z: Optional[float] = None, rounds: Optional[float] = None
) -> float:
    """Ansatz logical error rate at noise strength ``p``."""
    d_z = d_x if d_z is None else d_z
    k, prefactor = exponent_and_prefactor(fit.family, d_x, d_z, rounds)
    return fit.a * prefactor * (fit.b * p) ** k


def log_logical_rate(
    fit: AnsatzFit, p: float, d_x: float, d_z: Optional[float] = None, rounds: Optional[float] = None
) -> float:
    d_z = d_x if d_z is None else d_z
    k, prefactor = exponent_and_prefactor(fit.family, d_x, d_z, rounds)
    return math.log(fit.a) + math.log(prefactor) + k * (math.log(fit.b) + math.log(p))


def _log_model(X: np.ndarray, log_a: float, log_b: float) -> np.ndarray:
    log_p, k, log_prefactor = X
    return log_a + log_prefactor + k * (log_b + log_p)


def _design(points: Sequence[MonteCarloPoint], family: AnsatzFamily) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, y, sigma = [], [], []
    for point in points:
        if point.failures == 0 or point.failures == point.shots:
            continue
        code = point.spec.code
        k, prefactor = exponent_and_prefactor(family, code.d_x, code.height, point.spec.resolved_rounds)
        rows.append((math.log(point.spec.p), k, math.log(prefactor)))
        y.append(math.log(point.failure_rate))
        sigma.append(point.standard_error / point.failure_rate)
    return np.array(rows, dtype=float).T, np.array(y), np.array(sigma)


def fit_ansatz(points: Sequence[MonteCarloPoint], family: Union[AnsatzFamily, str]) -> AnsatzFit:
    """
    Weighted Levenberg-Marquardt fit of (a, b) in log space.

    Points with zero or all failures carry no log-space information and are
    skipped. ``rect_x`` expects X-memory points and ``rect_z`` Z-memory points.

    Raises:
        ParameterError: fewer than three distinct sizes with usable points
        FitError: the optimizer does not converge
    """
    family = AnsatzFamily(family)
    X, y, sigma = _design(points, family)
    usable = [p for p in points if 0 < p.failures < p.shots]
    sizes = {(p.spec.code.d_x, p.spec.code.height) for p in usable}
    if len(sizes) < MIN_SIZES:
        raise ParameterError(f"fit_ansatz needs at least {MIN_SIZES} sizes with failures, got {len(sizes)}")

    # linear least squares gives the starting point
    k = X[1]
    A = np.column_stack([np.ones_like(k), k])
    start, *_ = np.linalg.lstsq(A, y - X[2] - k * X[0], rcond=None)
    try:
        popt, pcov = curve_fit(_log_model, X, y, p0=start, sigma=sigma, absolute_sigma=True, method="lm")
    except (RuntimeError, ValueError) as e:
        raise FitError(f"{family.value} ansatz fit did not converge: {e}", {"points": len(y), "start": start.tolist()}) from e
    if not np.all(np.isfinite(pcov)):
        raise FitError(f"{family.value} ansatz fit has a singular covariance", {"popt": popt.tolist()})

    log_a, log_b = popt
    sigma_log = np.sqrt(np.diag(pcov))
    residual = float(np.sqrt(np.mean((_log_model(X, *popt) - y) ** 2)))
    etas = {p.spec.eta for p in usable}
    fit = AnsatzFit(
        family=family,
        a=float(np.exp(log_a)),
        b=float(np.exp(log_b)),
        sigma_a=float(np.exp(log_a) * sigma_log[0]),
        sigma_b=float(np.exp(log_b) * sigma_log[1]),
        eta=etas.pop() if len(etas) == 1 else None,
        residual=residual,
    )
    logger.info(f"Fitted {family.value} ansatz: a={fit.a:.4g}({fit.sigma_a:.2g}) b={fit.b:.4g}({fit.sigma_b:.2g})")
    return fit


def fit_exponents(points: Sequence[MonteCarloPoint]) -> List[ExponentFit]:
    """
    Per-size slope of log p_log against log p.

    Under the xy ansatz the slope is (sqrt(n) + 1) / 2 for every size.
    """
    by_size = {}
    for point in points:
        if 0 < point.failures < point.shots:
            by_size.setdefault((point.spec.code.d_x, point.spec.code.height), []).append(point)
    fits = []
    for (d_x, d_z), group in sorted(by_size.items()):
        if len({p.spec.p for p in group}) < 2:
            continue
        log_p = np.log([p.spec.p for p in group])
        log_f = np.log([p.failure_rate for p in group])
        weights = np.array([p.failure_rate / p.standard_error for p in group])
        slope, intercept = np.polyfit(log_p, log_f, 1, w=weights)
        n = d_x * d_z
        fits.append(
            ExponentFit(
                L=d_x,
                n=n,
                slope=float(slope),
                intercept=float(intercept),
                expected_slope=(math.sqrt(n) + 1) / 2,
            )
        )
    return fits
