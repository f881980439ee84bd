"""Pauli-group algebra on integer bitsets.

A PauliString stores its X and Z components as Python integers (bit q set when
qubit q carries that component), so stabilizers of a distance-99 code stay
compact. The operator represented is ``i**phase`` times the tensor product of
Hermitian single-qubit Paulis, with Y standing for the pair (x=1, z=1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Mapping, Tuple

import numpy as np

from app.core.exceptions import DimensionError, ParameterError

_SIGN_PREFIXES = (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2))
_PHASE_NAMES = {0: "+", 1: "+i", 2: "-", 3: "-i"}

# Single-qubit conjugation tables: letter -> (new letter, extra phase exponent)
_CLIFFORD_TABLES: Dict[str, Dict[str, Tuple[str, int]]] = {
    "I": {"X": ("X", 0), "Y": ("Y", 0), "Z": ("Z", 0)},
    "H": {"X": ("Z", 0), "Y": ("Y", 2), "Z": ("X", 0)},
    "A": {"X": ("X", 0), "Y": ("Z", 0), "Z": ("Y", 2)},
}


def iter_bits(value: int) -> Iterator[int]:
    """Yield the positions of the set bits of ``value`` in increasing order."""
    while value:
        low = value & -value
        yield low.bit_length() - 1
        value ^= low


def bits_to_int(bits: Iterable[int] | np.ndarray) -> int:
    """Pack a 0/1 vector (index 0 = least significant bit) into an integer."""
    array = np.asarray(bits, dtype=np.uint8)
    if array.size == 0:
        return 0
    packed = np.packbits(array, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def int_to_bits(value: int, n: int) -> np.ndarray:
    """Unpack an integer bitset into a length-n uint8 vector."""
    if n == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = value.to_bytes((n + 7) // 8, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:n].copy()


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator with phase tracked as an exponent of i."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ParameterError("qubit count must be non-negative")
        limit = 1 << self.n
        if self.x >= limit or self.z >= limit or self.x < 0 or self.z < 0:
            raise DimensionError(f"bitset exceeds {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # construction -----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_str(cls, label: str) -> "PauliString":
        """Parse labels such as ``"XIZY"``, ``"-ZZ"`` or ``"+iX"``; qubit 0 is leftmost."""
        phase = 0
        body = label.strip()
        for prefix, value in _SIGN_PREFIXES:
            if body.startswith(prefix):
                phase = value
                body = body[len(prefix):]
                break
        x = z = 0
        for q, letter in enumerate(body):
            if letter in ("X", "Y"):
                x |= 1 << q
            if letter in ("Z", "Y"):
                z |= 1 << q
            if letter not in "IXYZ_":
                raise ParameterError(f"invalid Pauli letter {letter!r} in {label!r}")
        return cls(len(body), x, z, phase)

    @classmethod
    def from_letters(cls, n: int, letters: Mapping[int, str], phase: int = 0) -> "PauliString":
        """Build a Pauli from a sparse ``{qubit: letter}`` mapping."""
        x = z = 0
        for q, letter in letters.items():
            if not 0 <= q < n:
                raise DimensionError(f"qubit {q} outside 0..{n - 1}")
            if letter in ("X", "Y"):
                x |= 1 << q
            if letter in ("Z", "Y"):
                z |= 1 << q
        return cls(n, x, z, phase)

    @classmethod
    def from_bits(cls, x_bits: np.ndarray, z_bits: np.ndarray, phase: int = 0) -> "PauliString":
        if len(x_bits) != len(z_bits):
            raise DimensionError("x and z components differ in length")
        return cls(len(x_bits), bits_to_int(x_bits), bits_to_int(z_bits), phase)

    # views ------------------------------------------------------------

    @property
    def x_bits(self) -> np.ndarray:
        return int_to_bits(self.x, self.n)

    @property
    def z_bits(self) -> np.ndarray:
        return int_to_bits(self.z, self.n)

    @property
    def sign(self) -> complex:
        return (1, 1j, -1, -1j)[self.phase]

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(iter_bits(self.x | self.z))

    def letter(self, qubit: int) -> str:
        xb = (self.x >> qubit) & 1
        zb = (self.z >> qubit) & 1
        return "IXZY"[xb | (zb << 1)]

    def letters(self) -> Dict[int, str]:
        return {q: self.letter(q) for q in self.support}

    def __str__(self) -> str:
        body = "".join(self.letter(q) for q in range(self.n))
        return f"{_PHASE_NAMES[self.phase]}{body}"

    # algebra ----------------------------------------------------------

    def _check_size(self, other: "PauliString") -> None:
        if self.n != other.n:
            raise DimensionError(f"Pauli sizes differ: {self.n} vs {other.n}")

    def commutes(self, other: "PauliString") -> bool:
        self._check_size(other)
        return ((self.x & other.z) ^ (self.z & other.x)).bit_count() % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        self._check_size(other)
        x1, z1, x2, z2 = self.x, self.z, other.x, other.z
        only_x1, only_z1, y1 = x1 & ~z1, z1 & ~x1, x1 & z1
        only_x2, only_z2, y2 = x2 & ~z2, z2 & ~x2, x2 & z2
        plus = (y1 & only_z2).bit_count() + (only_x1 & y2).bit_count() + (only_z1 & only_x2).bit_count()
        minus = (y1 & only_x2).bit_count() + (only_x1 & only_z2).bit_count() + (only_z1 & y2).bit_count()
        phase = self.phase + other.phase + plus - minus
        return PauliString(self.n, x1 ^ x2, z1 ^ z2, phase)

    def equals_up_to_phase(self, other: "PauliString") -> bool:
        return self.n == other.n and self.x == other.x and self.z == other.z

    def conjugated(self, tags: Mapping[int, str]) -> "PauliString":
        """Conjugate qubit-wise by single-qubit Cliffords tagged ``I``, ``H`` or ``A = HSH``."""
        x, z, phase = self.x, self.z, self.phase
        for q, tag in tags.items():
            if tag not in _CLIFFORD_TABLES:
                raise ParameterError(f"unknown Clifford tag {tag!r}")
            letter = self.letter(q)
            if letter == "I":
                continue
            new_letter, extra = _CLIFFORD_TABLES[tag][letter]
            bit = 1 << q
            x &= ~bit
            z &= ~bit
            if new_letter in ("X", "Y"):
                x |= bit
            if new_letter in ("Z", "Y"):
                z |= bit
            phase += extra
        return PauliString(self.n, x, z, phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff the symplectic inner product of ``a`` and ``b`` is even."""
    return a.commutes(b)


def conjugate_letter(letter: str, tag: str) -> str:
    """Image of a single Pauli letter under the tagged Clifford, ignoring sign."""
    if letter == "I":
        return "I"
    return _CLIFFORD_TABLES[tag][letter][0]
