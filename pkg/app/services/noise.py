"""Biased circuit-level Pauli noise parameterised by strength ``p`` and bias ``eta``."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Tuple

from app.core.exceptions import ParameterError

Outcomes = Tuple[Tuple[str, float], ...]

# Two-qubit outcomes built only from Z and I keep the full p/15 rate.
_DEPHASING_PAIRS = {"ZZ", "ZI", "IZ"}


def _check(p: float, eta: float) -> None:
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    if not eta >= 1.0:
        raise ParameterError(f"eta must be >= 1, got {eta}")


def cnot_infidelity(p: float, eta: float) -> float:
    """Total error probability of the two-qubit channel, (1/5 + 4/(5 eta)) p."""
    _check(p, eta)
    return (0.2 + 0.8 / eta) * p


def p_from_cnot_infidelity(p_cx: float, eta: float) -> float:
    """Inverse of :func:`cnot_infidelity`."""
    _check(p_cx, eta)
    return p_cx / (0.2 + 0.8 / eta)


@dataclass(frozen=True)
class NoiseModel:
    """Z-biased noise: Z-type faults at rate ~p, all others suppressed by 1/eta."""

    p: float
    eta: float = 1.0

    def __post_init__(self) -> None:
        _check(self.p, self.eta)

    @property
    def p_cx(self) -> float:
        return cnot_infidelity(self.p, self.eta)

    @property
    def is_noiseless(self) -> bool:
        return self.p == 0.0

    def two_qubit_channel(self) -> Outcomes:
        strong, weak = self.p / 15, self.p / (15 * self.eta)
        outcomes = []
        for a, b in itertools.product("IXYZ", repeat=2):
            label = a + b
            if label == "II":
                continue
            outcomes.append((label, strong if label in _DEPHASING_PAIRS else weak))
        return tuple(o for o in outcomes if o[1] > 0)

    def single_qubit_channel(self) -> Outcomes:
        weak = self.p / (3 * self.eta)
        outcomes = (("X", weak), ("Y", weak), ("Z", self.p / 3))
        return tuple(o for o in outcomes if o[1] > 0)

    def preparation_flip(self, basis: str) -> Outcomes:
        """Error after preparing a |+>, |+i> (Z flip, 2p/3) or |0> (X flip, 2p/(3 eta)) state."""
        if basis == "Z":
            outcome = ("X", 2 * self.p / (3 * self.eta))
        else:
            outcome = ("Z", 2 * self.p / 3)
        return (outcome,) if outcome[1] > 0 else ()

    def measurement_flip(self, basis: str) -> float:
        """Probability that a single-qubit measurement result is reported flipped."""
        if basis == "Z":
            return 2 * self.p / (3 * self.eta)
        return 2 * self.p / 3
