"""
Threshold estimation by the critical-exponent method.

Near threshold the failure rate of every size collapses onto one curve in
the rescaled variable x = (p - p_th) L^(1/nu); a quadratic in x is fitted to
all sizes at once and the threshold error comes from a leave-one-size-out
jackknife.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from app.core.exceptions import FitDomainError, FitError, ParameterError
from app.schemas.analysis import ThresholdFit
from app.schemas.experiment import MonteCarloPoint

logger = logging.getLogger(__name__)

NU_STARTS = (0.7, 1.0, 1.4)
MIN_SIZES = 3
MIN_RATES_PER_SIZE = 4


def scaling_form(X: np.ndarray, p_th: float, nu: float, A: float, B: float, C: float) -> np.ndarray:
    p, L = X
    x = (p - p_th) * np.power(L, 1.0 / nu)
    return A + B * x + C * x ** 2


def _arrays(points: Sequence[MonteCarloPoint]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = np.array([pt.p_cx for pt in points])
    L = np.array([pt.size for pt in points], dtype=float)
    f = np.array([pt.failure_rate for pt in points])
    # zero-failure points still need a finite weight
    sigma = np.array([max(pt.standard_error, 1.0 / max(pt.shots, 1)) for pt in points])
    return np.vstack([p, L]), f, sigma


def _fit_once(points: Sequence[MonteCarloPoint]) -> Tuple[np.ndarray, np.ndarray, float]:
    """Best of the multistart fits: (popt, pcov, chi2)."""
    X, f, sigma = _arrays(points)
    p_mid = float(np.median(X[0]))
    best: Optional[Tuple[np.ndarray, np.ndarray, float]] = None
    failures: List[str] = []
    for nu in NU_STARTS:
        start = (p_mid, nu, float(np.median(f)), 1.0, 0.0)
        try:
            popt, pcov = curve_fit(scaling_form, X, f, p0=start, sigma=sigma, absolute_sigma=True, method="lm", maxfev=20000)
        except (RuntimeError, ValueError) as e:
            failures.append(f"nu0={nu}: {e}")
            continue
        chi2 = float(np.sum(((scaling_form(X, *popt) - f) / sigma) ** 2))
        if best is None or chi2 < best[2]:
            best = (popt, pcov, chi2)
    for message in failures:
        logger.warning(f"Threshold fit restart failed ({message})")
    if best is None:
        raise FitError("every threshold fit restart failed", {"restarts": failures})
    return best


def _group(points: Sequence[MonteCarloPoint]) -> Dict[int, List[MonteCarloPoint]]:
    groups: Dict[int, List[MonteCarloPoint]] = defaultdict(list)
    for point in points:
        groups[point.size].append(point)
    return dict(sorted(groups.items()))


def fit_threshold(points: Sequence[MonteCarloPoint]) -> ThresholdFit:
    """
    Fit {p_th, nu, A, B, C} to points grouped by lattice size L.

    Raises:
        ParameterError: fewer than 3 sizes or fewer than 4 rates per size
        FitDomainError: fitted p_th outside the scanned p_CX range
        FitError: no restart converged
    """
    groups = _group(points)
    if len(groups) < MIN_SIZES:
        raise ParameterError(f"fit_threshold needs at least {MIN_SIZES} sizes, got {len(groups)}")
    thin = [L for L, group in groups.items() if len({pt.spec.p for pt in group}) < MIN_RATES_PER_SIZE]
    if thin:
        raise ParameterError(f"sizes {thin} have fewer than {MIN_RATES_PER_SIZE} noise strengths")

    popt, pcov, chi2 = _fit_once(points)
    p_th, nu, A, B, C = (float(v) for v in popt)
    p_values = [pt.p_cx for pt in points]
    if not min(p_values) <= p_th <= max(p_values):
        raise FitDomainError(
            f"fitted threshold {p_th:.5g} lies outside the scanned range [{min(p_values):.5g}, {max(p_values):.5g}]"
        )

    estimates = []
    for left_out in groups:
        subset = [pt for L, group in groups.items() if L != left_out for pt in group]
        try:
            sub, _, _ = _fit_once(subset)
        except FitError:
            logger.warning(f"Jackknife fit without L={left_out} failed; skipped")
            continue
        estimates.append(sub[:2])
    if len(estimates) >= 2:
        estimates_arr = np.array(estimates)
        k = len(estimates_arr)
        spread = np.sum((estimates_arr - estimates_arr.mean(axis=0)) ** 2, axis=0) * (k - 1) / k
        sigma_pth, sigma_nu = (float(s) for s in np.sqrt(spread))
    else:
        sigma_pth, sigma_nu = (float(s) for s in np.sqrt(np.abs(np.diag(pcov))[:2]))

    dof = max(len(points) - 5, 1)
    fit = ThresholdFit(
        p_th=p_th,
        nu=nu,
        A=A,
        B=B,
        C=C,
        sigma_pth=sigma_pth,
        sigma_nu=sigma_nu,
        chi2_per_dof=chi2 / dof,
        sizes=list(groups),
    )
    logger.info(f"Threshold p_th={p_th:.5%} +- {sigma_pth:.5%}, nu={nu:.3f}, chi2/dof={fit.chi2_per_dof:.2f}")
    return fit
