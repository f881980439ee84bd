"""Unit tests for stabilizer codes and logical-operator searches."""
import pytest

from app.core.exceptions import CapacityError, CodeConstructionError, ParameterError
from app.services.codes import build_css, build_xy, build_xy_deformed
from app.services.pauli import PauliString, bits_to_int
from app.services.stabilizer import (
    StabilizerCode,
    min_logical_weight,
    supports_of,
    syndrome_of,
    typed_logical_search,
    z_type_distance,
)


@pytest.fixture
def repetition_code() -> StabilizerCode:
    """Three-qubit bit-flip code."""
    return StabilizerCode(
        n=3,
        stabilizers=(PauliString.from_str("ZZI"), PauliString.from_str("IZZ")),
        logical_x=PauliString.from_str("XXX"),
        logical_z=PauliString.from_str("ZII"),
    )


class TestStabilizerCode:
    """Test cases for StabilizerCode validation."""

    def test_valid_code_passes(self, repetition_code):
        """Test that a consistent code validates silently."""
        repetition_code.validate()

    def test_anticommuting_stabilizers(self):
        """Test that anticommuting stabilizers are rejected."""
        code = StabilizerCode(
            n=2,
            stabilizers=(PauliString.from_str("XI"), PauliString.from_str("ZI")),
            logical_x=PauliString.from_str("IX"),
            logical_z=PauliString.from_str("IZ"),
        )
        with pytest.raises(CodeConstructionError, match="anticommute"):
            code.validate()

    def test_logical_must_commute_with_stabilizers(self):
        """Test that a logical anticommuting with a stabilizer is rejected."""
        code = StabilizerCode(
            n=3,
            stabilizers=(PauliString.from_str("ZZI"), PauliString.from_str("IZZ")),
            logical_x=PauliString.from_str("XII"),
            logical_z=PauliString.from_str("ZII"),
        )
        with pytest.raises(CodeConstructionError, match="logical X"):
            code.validate()

    def test_logicals_must_anticommute(self):
        """Test that commuting logical X and Z are rejected."""
        code = StabilizerCode(
            n=3,
            stabilizers=(PauliString.from_str("ZZI"), PauliString.from_str("IZZ")),
            logical_x=PauliString.from_str("XXX"),
            logical_z=PauliString.from_str("ZZI"),
        )
        with pytest.raises(CodeConstructionError):
            code.validate()

    def test_non_hermitian_stabilizer(self):
        """Test that a stabilizer with an imaginary phase is rejected."""
        code = StabilizerCode(
            n=3,
            stabilizers=(PauliString.from_str("iZZI"), PauliString.from_str("IZZ")),
            logical_x=PauliString.from_str("XXX"),
            logical_z=PauliString.from_str("ZII"),
        )
        with pytest.raises(CodeConstructionError, match="Hermitian"):
            code.validate()

    def test_syndrome_of(self, repetition_code):
        """Test the stabilizer syndrome of single bit flips."""
        assert syndrome_of(repetition_code, PauliString.from_str("XII")).tolist() == [1, 0]
        assert syndrome_of(repetition_code, PauliString.from_str("IXI")).tolist() == [1, 1]
        assert syndrome_of(repetition_code, PauliString.from_str("ZZZ")).tolist() == [0, 0]

    def test_type_check_matrix_for_z(self, repetition_code):
        """Test that the Z-type check matrix marks X components of the stabilizers."""
        assert not repetition_code.type_check_matrix("Z").to_dense().any()
        assert repetition_code.type_check_matrix("X").to_dense().tolist() == [[1, 1, 0], [0, 1, 1]]

    def test_unknown_pauli_type(self, repetition_code):
        """Test that an unknown type letter raises ParameterError."""
        with pytest.raises(ParameterError):
            repetition_code.type_check_matrix("W")


class TestLogicalSearches:
    """Test cases for the exhaustive distance searches."""

    def test_repetition_code_distances(self, repetition_code):
        """Test that bit flips need weight 3 and phase flips weight 1."""
        assert min_logical_weight(repetition_code, "X") == 3
        assert min_logical_weight(repetition_code, "Z") == 1
        assert min_logical_weight(repetition_code) == 1

    def test_rectangular_css_typed_distances(self):
        """Test the X and Z distances of a 3x5 CSS patch."""
        code = build_css(3, 5).to_code()
        assert min_logical_weight(code, "X") == 3
        assert min_logical_weight(code, "Z") == 5
        assert min_logical_weight(code) == 3

    def test_square_css_unrestricted_distance(self):
        """Test the unrestricted distance of the distance-3 CSS code."""
        assert min_logical_weight(build_css(3, 3).to_code(), "any") == 3

    @pytest.mark.parametrize("L", [3, 5, 7])
    def test_xy_code_z_distance_is_n(self, L):
        """Test that the only Z-type logical of the XY code is Z on every qubit."""
        result = z_type_distance(build_xy(L).to_code())
        assert result.distance == L * L
        assert result.kernel_dimension == 1
        assert result.z_logical_count == 1
        assert result.z_stabilizer_count == 0

    def test_deformed_xy_minimum_logical_is_a_logical(self):
        """Test that the reported minimum Z-type operator is an undetectable logical."""
        code = build_xy_deformed(5)[0].to_code()
        result = z_type_distance(code)
        assert result.distance is not None
        assert len(result.logicals) >= 1
        for vector in result.logicals:
            operator = PauliString(code.n, 0, bits_to_int(vector))
            assert operator.weight == result.distance
            assert all(operator.commutes(s) for s in code.stabilizers)
            assert not all(operator.commutes(l) for l in code.logicals)

    def test_capacity_bound(self):
        """Test that a kernel larger than the enumeration bound raises CapacityError."""
        code = build_css(3, 3).to_code()
        with pytest.raises(CapacityError):
            typed_logical_search(code, "Z", max_dim=1)

    def test_min_logical_weight_unknown_type(self, repetition_code):
        """Test that an unknown type raises ParameterError."""
        with pytest.raises(ParameterError):
            min_logical_weight(repetition_code, "W")

    def test_supports_of(self):
        """Test that bit vectors convert to sorted supports."""
        assert supports_of([[1, 0, 1], [0, 1, 0]]) == [(0, 2), (1,)]
