"""Unit tests for the qubit-overhead solver."""
import pytest

from app.core.exceptions import OverheadRangeError, ParameterError
from app.schemas.analysis import AnsatzFamily, AnsatzFit, OverheadFamily
from app.services.ansatz import logical_rate
from app.services.noise import p_from_cnot_infidelity
from app.services.overhead import overhead_curve, qubit_count, solve_overhead


class TestSolveOverhead:
    """Test cases for solve_overhead with the bundled coefficients."""

    @pytest.mark.parametrize(
        "family,d_x,d_z,qubits",
        [
            (OverheadFamily.XY, 23, 23, 1057),
            (OverheadFamily.SQUARE, 31, 31, 1921),
            (OverheadFamily.RECTANGULAR, 31, 11, 681),
        ],
    )
    def test_reference_point(self, coefficient_service, family, d_x, d_z, qubits):
        """Test the layouts reaching 1e-12 at p_CX = 0.1% with eta = 100."""
        solution = solve_overhead(family, p_cx=1e-3)
        assert (solution.d_x, solution.d_z) == (d_x, d_z)
        assert solution.qubits == qubits
        assert solution.rounds == max(d_x, d_z)
        assert solution.logical_error_rate <= 1e-12
        assert solution.p == pytest.approx(p_from_cnot_infidelity(1e-3, 100.0))

    def test_rectangular_aspect_ratio(self, coefficient_service):
        """Test that the rectangular patch is much shorter in Z."""
        solution = solve_overhead("rectangular", p_cx=1e-3)
        assert solution.aspect_ratio == pytest.approx(11 / 31)
        assert solution.continuous_aspect_ratio < 1.0

    @pytest.mark.parametrize("family", [OverheadFamily.XY, OverheadFamily.SQUARE])
    def test_continuous_relaxation_is_smaller(self, coefficient_service, family):
        """Test that the continuous square side lies below the odd integer solution."""
        solution = solve_overhead(family, p_cx=1e-3)
        assert solution.continuous_d_x <= solution.d_x
        assert solution.continuous_d_x > solution.d_x - 2
        assert solution.continuous_qubits <= solution.qubits

    def test_xy_beats_square(self, coefficient_service):
        """Test that the XY code needs fewer qubits than the square CSS code."""
        assert solve_overhead("xy", p_cx=1e-3).qubits < solve_overhead("square", p_cx=1e-3).qubits

    def test_explicit_p(self, coefficient_service):
        """Test that passing p skips the bias conversion."""
        p = p_from_cnot_infidelity(1e-3, 100.0)
        assert solve_overhead("xy", p=p).qubits == 1057

    def test_custom_fits(self):
        """Test a hand-made xy fit that first meets the target at L = 5."""
        fits = {AnsatzFamily.XY: AnsatzFit(family=AnsatzFamily.XY, a=1.0, b=10.0)}
        solution = solve_overhead("xy", p=0.01, target=5e-3, fits=fits)
        assert solution.d_x == 5
        assert solution.logical_error_rate == pytest.approx(logical_rate(fits[AnsatzFamily.XY], 0.01, 5))

    @pytest.mark.parametrize("kwargs", [{}, {"p": 0.001, "p_cx": 0.001}])
    def test_needs_exactly_one_noise_strength(self, coefficient_service, kwargs):
        """Test that neither or both of p and p_cx raise ParameterError."""
        with pytest.raises(ParameterError):
            solve_overhead("xy", **kwargs)

    @pytest.mark.parametrize("target", [0.0, 1.0, -1e-3])
    def test_target_range(self, coefficient_service, target):
        """Test that targets outside (0, 1) raise ParameterError."""
        with pytest.raises(ParameterError):
            solve_overhead("xy", p_cx=1e-3, target=target)

    def test_unreachable_below_max_distance(self, coefficient_service):
        """Test that a capped search raises OverheadRangeError."""
        with pytest.raises(OverheadRangeError):
            solve_overhead("xy", p_cx=1e-3, max_distance=5)

    def test_qubit_count(self):
        """Test 2 d_x d_z - 1."""
        assert qubit_count(3, 3) == 17
        assert qubit_count(31, 11) == 681


class TestOverheadCurve:
    """Test cases for overhead_curve."""

    def test_curve_marks_unreachable_points(self, coefficient_service):
        """Test that above threshold every family is None."""
        first, second = overhead_curve([1e-3, 0.05])
        assert first.qubits == {
            OverheadFamily.XY: 1057,
            OverheadFamily.SQUARE: 1921,
            OverheadFamily.RECTANGULAR: 681,
        }
        assert all(q is None for q in second.qubits.values())
        assert all(q is None for q in second.continuous_qubits.values())

    def test_family_subset(self, coefficient_service):
        """Test that only the requested families are solved."""
        (point,) = overhead_curve([1e-3], families=[OverheadFamily.XY])
        assert list(point.qubits) == [OverheadFamily.XY]
