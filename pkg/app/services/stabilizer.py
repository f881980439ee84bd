"""Stabilizer codes and exhaustive distance searches over GF(2) kernels."""
from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from app.core.config import get_settings
from app.core.exceptions import CapacityError, CodeConstructionError, ParameterError
from app.services.gf2 import BinaryMatrix, gf2_kernel
from app.services.pauli import PauliString, bits_to_int, int_to_bits, iter_bits

logger = logging.getLogger(__name__)

settings = get_settings()

MAX_VALIDATION_QUBITS = 50
SUPPORT_SEARCH_BUDGET = 2_000_000
PAULI_TYPES = ("X", "Y", "Z", "any")


@dataclass(frozen=True)
class StabilizerCode:
    """A stabilizer code with one logical qubit."""

    n: int
    stabilizers: Tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    logical_y: Optional[PauliString] = None
    coordinates: Tuple[Tuple[int, int], ...] = ()

    @property
    def logicals(self) -> Tuple[PauliString, ...]:
        found = [self.logical_x, self.logical_z]
        if self.logical_y is not None:
            found.append(self.logical_y)
        return tuple(found)

    def validate(self) -> None:
        """Check commutation invariants; raises CodeConstructionError on the first violation."""
        for index, stabilizer in enumerate(self.stabilizers):
            if stabilizer.n != self.n:
                raise CodeConstructionError(f"stabilizer {index} acts on {stabilizer.n} qubits, code has {self.n}")
            if stabilizer.weight == 0 and stabilizer.phase != 0:
                raise CodeConstructionError(f"stabilizer {index} is a nontrivial multiple of the identity")
            if stabilizer.phase % 2:
                raise CodeConstructionError(f"stabilizer {index} is not Hermitian")

        by_qubit: Dict[int, List[int]] = defaultdict(list)
        for index, stabilizer in enumerate(self.stabilizers):
            for q in stabilizer.support:
                by_qubit[q].append(index)
        checked: Set[Tuple[int, int]] = set()
        for members in by_qubit.values():
            for a, b in itertools.combinations(members, 2):
                if (a, b) in checked:
                    continue
                checked.add((a, b))
                if not self.stabilizers[a].commutes(self.stabilizers[b]):
                    raise CodeConstructionError(f"stabilizers {a} and {b} anticommute")

        for name, logical in zip(("X", "Z", "Y"), self.logicals):
            for index, stabilizer in enumerate(self.stabilizers):
                if not logical.commutes(stabilizer):
                    raise CodeConstructionError(f"logical {name} anticommutes with stabilizer {index}")
        if self.logical_x.commutes(self.logical_z):
            raise CodeConstructionError("logical X and logical Z commute")
        if self.logical_y is not None:
            if self.logical_y.commutes(self.logical_x) or self.logical_y.commutes(self.logical_z):
                raise CodeConstructionError("logical Y must anticommute with logical X and Z")

    def anticommutation_bits(self, operator_mask: Tuple[int, int], pauli_type: str) -> int:
        """Bits where an operator (x, z) anticommutes with a single-type Pauli."""
        x, z = operator_mask
        if pauli_type == "Z":
            return x
        if pauli_type == "X":
            return z
        if pauli_type == "Y":
            return x ^ z
        raise ParameterError(f"pauli_type must be X, Y or Z, got {pauli_type!r}")

    def type_check_matrix(self, pauli_type: str) -> BinaryMatrix:
        """Rows: stabilizers; entry 1 where the stabilizer anticommutes with ``pauli_type`` on that qubit."""
        rows = [self.anticommutation_bits((s.x, s.z), pauli_type) for s in self.stabilizers]
        return BinaryMatrix.from_int_rows(rows, self.n)


@dataclass(frozen=True)
class ZTypeDistance:
    """Result of an exhaustive Z-type logical search."""

    distance: Optional[int]
    logicals: Tuple[np.ndarray, ...] = field(repr=False)
    z_stabilizer_count: int
    z_logical_count: int
    kernel_dimension: int


def _gray_code_span(basis: Sequence[int]):
    """Yield every nonzero combination of ``basis`` (Gray-code order, one XOR per step)."""
    current = 0
    for step in range(1, 1 << len(basis)):
        current ^= basis[(step & -step).bit_length() - 1]
        yield current


def _enumeration_bound(max_dim: Optional[int]) -> int:
    return settings.KERNEL_ENUMERATION_MAX_DIM if max_dim is None else max_dim


def typed_logical_search(
    code: StabilizerCode, pauli_type: str, max_dim: Optional[int] = None
) -> ZTypeDistance:
    """Enumerate the kernel of the type-restricted check matrix and classify every element."""
    basis_rows = gf2_kernel(code.type_check_matrix(pauli_type))
    dimension = len(basis_rows)
    bound = _enumeration_bound(max_dim)
    if dimension > bound:
        raise CapacityError(
            f"{pauli_type}-type kernel dimension {dimension} exceeds the enumeration bound {bound}"
        )
    basis = [bits_to_int(row) for row in basis_rows]
    anti = [code.anticommutation_bits((l.x, l.z), pauli_type) for l in code.logicals]

    best: Optional[int] = None
    best_vectors: List[int] = []
    stabilizer_count = logical_count = 0
    for vector in _gray_code_span(basis):
        if all((vector & mask).bit_count() % 2 == 0 for mask in anti):
            stabilizer_count += 1
            continue
        logical_count += 1
        weight = vector.bit_count()
        if best is None or weight < best:
            best, best_vectors = weight, [vector]
        elif weight == best:
            best_vectors.append(vector)

    logger.debug(
        f"{pauli_type}-type search on n={code.n}: kernel dim {dimension}, "
        f"{stabilizer_count} stabilizers, {logical_count} logicals, min weight {best}"
    )
    return ZTypeDistance(
        distance=best,
        logicals=tuple(int_to_bits(v, code.n) for v in sorted(best_vectors)),
        z_stabilizer_count=stabilizer_count,
        z_logical_count=logical_count,
        kernel_dimension=dimension,
    )


def z_type_distance(code: StabilizerCode, max_dim: Optional[int] = None) -> ZTypeDistance:
    """
    Minimum weight of a Z-type logical operator.

    Z-type operators commuting with every stabilizer form the kernel of the
    X/Y-component check matrix; each nonzero kernel element is a stabilizer if
    it commutes with all logicals and a logical otherwise.

    Raises:
        CapacityError: if the kernel dimension exceeds the enumeration bound
    """
    return typed_logical_search(code, "Z", max_dim)


def _symplectic_search(code: StabilizerCode, max_dim: int) -> Tuple[bool, Optional[int]]:
    """Enumerate the symplectic centralizer; returns (searched, min weight)."""
    n = code.n
    # row . (x | z << n) = |x & s.z| + |z & s.x|
    rows = [s.z | (s.x << n) for s in code.stabilizers]
    basis_rows = gf2_kernel(BinaryMatrix.from_int_rows(rows, 2 * n))
    if len(basis_rows) > max_dim:
        return False, None
    low = (1 << n) - 1
    logicals = code.logicals
    best: Optional[int] = None
    for vector in _gray_code_span([bits_to_int(r) for r in basis_rows]):
        x, z = vector & low, vector >> n
        candidate = PauliString(n, x, z)
        if all(candidate.commutes(l) for l in logicals):
            continue
        weight = (x | z).bit_count()
        if best is None or weight < best:
            best = weight
    return True, best


def _support_search(code: StabilizerCode) -> Optional[int]:
    n = code.n
    examined = 0
    for weight in range(1, n + 1):
        for support in itertools.combinations(range(n), weight):
            for letters in itertools.product("XYZ", repeat=weight):
                examined += 1
                if examined > SUPPORT_SEARCH_BUDGET:
                    raise CapacityError(f"support search exceeded {SUPPORT_SEARCH_BUDGET} candidates")
                candidate = PauliString.from_letters(n, dict(zip(support, letters)))
                if not all(candidate.commutes(s) for s in code.stabilizers):
                    continue
                if not all(candidate.commutes(l) for l in code.logicals):
                    return weight
    return None


def min_logical_weight(code: StabilizerCode, pauli_type: str = "any") -> int:
    """
    Code distance restricted to one Pauli type (or unrestricted for ``"any"``).

    Only meant for validation on small codes.

    Raises:
        CapacityError: n above the validation bound or search space too large
        ParameterError: unknown pauli_type, or no logical of that type exists
    """
    if pauli_type not in PAULI_TYPES:
        raise ParameterError(f"pauli_type must be one of {PAULI_TYPES}, got {pauli_type!r}")
    if code.n > MAX_VALIDATION_QUBITS:
        raise CapacityError(f"min_logical_weight supports n <= {MAX_VALIDATION_QUBITS}, got {code.n}")

    if pauli_type == "any":
        bound = _enumeration_bound(None)
        searched, weight = _symplectic_search(code, bound)
        if not searched:
            weight = _support_search(code)
    else:
        weight = typed_logical_search(code, pauli_type).distance
    if weight is None:
        raise ParameterError(f"code has no {pauli_type}-type logical operator")
    return weight


def syndrome_of(code: StabilizerCode, error: PauliString) -> np.ndarray:
    """Stabilizer syndrome bits of a Pauli error."""
    return np.array([0 if error.commutes(s) else 1 for s in code.stabilizers], dtype=np.uint8)


def supports_of(vectors: Sequence[np.ndarray]) -> List[Tuple[int, ...]]:
    return [tuple(iter_bits(bits_to_int(v))) for v in vectors]
