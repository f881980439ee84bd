"""Unit tests for the Pauli-string algebra."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from app.core.exceptions import DimensionError, ParameterError
from app.services.pauli import (
    PauliString,
    bits_to_int,
    commutes,
    conjugate_letter,
    int_to_bits,
    iter_bits,
)

LETTERS = st.text(alphabet="IXYZ", min_size=1, max_size=12)


def _dense_symplectic(a: PauliString, b: PauliString) -> int:
    return int((a.x_bits @ b.z_bits + a.z_bits @ b.x_bits) % 2)


class TestBitHelpers:
    """Test cases for integer bitset helpers."""

    def test_iter_bits_in_increasing_order(self):
        """Test that set bits are yielded from least significant upwards."""
        assert list(iter_bits(0b101001)) == [0, 3, 5]
        assert list(iter_bits(0)) == []

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=130))
    def test_bits_round_trip(self, bits):
        """Test that packing then unpacking returns the same vector."""
        value = bits_to_int(bits)
        assert int_to_bits(value, len(bits)).tolist() == bits


class TestPauliString:
    """Test cases for PauliString."""

    def test_from_str_reads_qubit_zero_first(self):
        """Test that the leftmost letter acts on qubit 0."""
        pauli = PauliString.from_str("XIZY")
        assert pauli.letter(0) == "X"
        assert pauli.letter(1) == "I"
        assert pauli.letter(2) == "Z"
        assert pauli.letter(3) == "Y"
        assert pauli.support == (0, 2, 3)
        assert pauli.weight == 3

    @pytest.mark.parametrize("label,phase", [("+X", 0), ("-X", 2), ("iX", 1), ("+iX", 1), ("-iX", 3)])
    def test_from_str_sign_prefixes(self, label, phase):
        """Test that sign prefixes set the phase exponent."""
        assert PauliString.from_str(label).phase == phase

    def test_from_str_rejects_unknown_letter(self):
        """Test that an invalid letter raises ParameterError."""
        with pytest.raises(ParameterError):
            PauliString.from_str("XQZ")

    def test_from_letters_out_of_range(self):
        """Test that a qubit index beyond n raises DimensionError."""
        with pytest.raises(DimensionError):
            PauliString.from_letters(3, {3: "X"})

    def test_str_round_trip(self):
        """Test that str() renders the phase and every letter."""
        assert str(PauliString.from_str("-iXZY")) == "-iXZY"
        assert str(PauliString.identity(2)) == "+II"

    def test_single_qubit_products(self):
        """Test XY = iZ, YZ = iX, ZX = iY and the reverse orders."""
        X, Y, Z = (PauliString.from_str(c) for c in "XYZ")
        assert str(X * Y) == "+iZ"
        assert str(Y * Z) == "+iX"
        assert str(Z * X) == "+iY"
        assert str(Y * X) == "-iZ"
        assert str(X * X) == "+I"

    def test_commutation_of_overlapping_strings(self):
        """Test that XX and ZZ commute while XI and ZI anticommute."""
        assert PauliString.from_str("XX").commutes(PauliString.from_str("ZZ"))
        assert not commutes(PauliString.from_str("XI"), PauliString.from_str("ZI"))

    def test_size_mismatch(self):
        """Test that operators on different qubit counts cannot be combined."""
        with pytest.raises(DimensionError):
            PauliString.from_str("XX").commutes(PauliString.from_str("X"))

    @given(st.integers(1, 12).flatmap(lambda n: st.tuples(
        st.text(alphabet="IXYZ", min_size=n, max_size=n),
        st.text(alphabet="IXYZ", min_size=n, max_size=n),
    )))
    def test_commutes_matches_symplectic_product(self, labels):
        """Test that commutes() agrees with the dense symplectic inner product."""
        a, b = (PauliString.from_str(label) for label in labels)
        assert a.commutes(b) == (_dense_symplectic(a, b) == 0)

    @given(st.integers(1, 10).flatmap(lambda n: st.tuples(
        st.text(alphabet="IXYZ", min_size=n, max_size=n),
        st.text(alphabet="IXYZ", min_size=n, max_size=n),
    )))
    def test_product_phase_flips_for_anticommuting_pairs(self, labels):
        """Test that AB = -BA exactly when A and B anticommute."""
        a, b = (PauliString.from_str(label) for label in labels)
        ab, ba = a * b, b * a
        assert ab.equals_up_to_phase(ba)
        expected = 0 if a.commutes(b) else 2
        assert (ab.phase - ba.phase) % 4 == expected

    @given(LETTERS)
    def test_square_is_identity(self, label):
        """Test that every Hermitian Pauli squares to the identity."""
        pauli = PauliString.from_str(label)
        square = pauli * pauli
        assert square.weight == 0
        assert square.phase == 0

    def test_from_bits_matches_from_str(self):
        """Test that explicit bit vectors build the same operator."""
        pauli = PauliString.from_bits(np.array([1, 0, 1]), np.array([0, 1, 1]))
        assert pauli.equals_up_to_phase(PauliString.from_str("XZY"))


class TestCliffordConjugation:
    """Test cases for the H and A = HSH qubit-wise conjugations."""

    @pytest.mark.parametrize("letter,image", [("X", "Z"), ("Z", "X"), ("Y", "Y"), ("I", "I")])
    def test_hadamard(self, letter, image):
        """Test that H swaps X and Z and fixes Y."""
        assert conjugate_letter(letter, "H") == image

    @pytest.mark.parametrize("letter,image", [("X", "X"), ("Y", "Z"), ("Z", "Y")])
    def test_a_gate(self, letter, image):
        """Test that A fixes X and swaps Y and Z."""
        assert conjugate_letter(letter, "A") == image

    def test_conjugated_tracks_sign(self):
        """Test that HYH = -Y carries the sign into the phase."""
        assert str(PauliString.from_str("Y").conjugated({0: "H"})) == "-Y"

    def test_conjugation_preserves_commutation(self):
        """Test that conjugating both operators by the same tags keeps their commutation."""
        a, b = PauliString.from_str("XYZY"), PauliString.from_str("ZZXY")
        tags = {0: "H", 1: "A", 3: "H"}
        assert a.commutes(b) == a.conjugated(tags).commutes(b.conjugated(tags))

    def test_unknown_tag(self):
        """Test that an unknown Clifford tag raises ParameterError."""
        with pytest.raises(ParameterError):
            PauliString.from_str("X").conjugated({0: "S"})
