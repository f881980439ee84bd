"""
Fragile-boundary experiments: the cost of noisy state preparation and
measurement, and the Z-type distance of the deformed XY code.
"""
from __future__ import annotations

import logging
import math
from typing import List, Optional

from app.core.exceptions import UndefinedRatioError
from app.schemas.analysis import SpamRatio, ZDistanceRow
from app.schemas.decoder import DecoderSpec
from app.schemas.experiment import CodeSpec, ExperimentSpec
from app.services.circuit import SpamMode
from app.services.codes import CodeFamily, build_layout
from app.services.montecarlo import run_point
from app.services.stabilizer import z_type_distance

logger = logging.getLogger(__name__)

PERIOD = 6


def ratio_with_error(numerator: int, denominator: int, shots: int) -> SpamRatio:
    """
    Ratio of two failure rates over the same number of shots, with binomial
    error propagation.

    Raises:
        UndefinedRatioError: the denominator has no failures
    """
    if denominator == 0:
        raise UndefinedRatioError(
            f"denominator has 0 failures (numerator {numerator}) in {shots} shots", numerator, denominator
        )
    f_num, f_den = numerator / shots, denominator / shots
    ratio = f_num / f_den
    relative = math.sqrt(
        (1 - f_num) / (shots * f_num) + (1 - f_den) / (shots * f_den)
    ) if numerator else math.sqrt((1 - f_den) / (shots * f_den))
    return SpamRatio(
        ratio=ratio,
        sigma=ratio * relative,
        spam_failures=numerator,
        memory_failures=denominator,
        shots=shots,
    )


def spam_ratio(
    code: CodeSpec,
    p: float,
    eta: float,
    shots: int,
    rounds: Optional[int] = None,
    decoder: Optional[DecoderSpec] = None,
    seed: Optional[int] = None,
    basis: str = "X",
    workers: Optional[int] = None,
) -> SpamRatio:
    """Logical error rate with noisy SPAM divided by the rate with perfect SPAM."""
    results = {}
    for spam in (SpamMode.NOISY, SpamMode.PERFECT):
        spec = ExperimentSpec(
            code=code,
            decoder=decoder or DecoderSpec(),
            p=p,
            eta=eta,
            rounds=rounds,
            basis=basis,
            spam=spam,
            shots=shots,
            seed=seed,
        )
        results[spam] = run_point(spec, workers=workers)
    ratio = ratio_with_error(results[SpamMode.NOISY].failures, results[SpamMode.PERFECT].failures, shots)
    logger.info(f"SPAM ratio {code.label} p={p:g} eta={eta:g}: {ratio.ratio:.3f} +- {ratio.sigma:.3f}")
    return ratio


def z_distance_row(L: int, family: CodeFamily = CodeFamily.XY_DEFORMED, max_dim: Optional[int] = None) -> ZDistanceRow:
    layout = build_layout(family, L)
    result = z_type_distance(layout.to_code(), max_dim)
    n = layout.num_data
    return ZDistanceRow(
        L=L,
        n=n,
        d_z=result.distance,
        ratio=None if result.distance is None else result.distance / n,
        kernel_dimension=result.kernel_dimension,
        z_stabilizer_count=result.z_stabilizer_count,
        z_logical_count=result.z_logical_count,
        minimum_logicals=len(result.logicals),
    )


def z_distance_scan(
    L_max: int,
    L_min: int = 3,
    family: CodeFamily | str = CodeFamily.XY_DEFORMED,
    max_dim: Optional[int] = None,
) -> List[ZDistanceRow]:
    """d_Z and d_Z / n for every odd L in [L_min, L_max]; capacity errors propagate."""
    family = CodeFamily(family)
    start = L_min if L_min % 2 else L_min + 1
    rows = [z_distance_row(L, family, max_dim) for L in range(max(start, 3), L_max + 1, 2)]
    for row in rows:
        logger.debug(f"L={row.L}: d_Z={row.d_z} ratio={row.ratio}")
    return rows


def expected_ratio_bucket(L: int) -> float:
    """Large-L limit of d_Z / n for the deformed XY code: 1/3 when L = 3 mod 6, else 5/9."""
    return 1 / 3 if L % PERIOD == 3 else 5 / 9
