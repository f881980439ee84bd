"""Unit tests for memory-experiment circuits."""
import pytest

from app.core.exceptions import ParameterError, ScheduleConflictError
from app.services.circuit import (
    Circuit,
    Instruction,
    SpamMode,
    Timestep,
    attach_noise,
    build_memory_experiment,
    memory_circuit,
)
from app.services.codes import build_css
from app.services.noise import NoiseModel
from app.services.sampler import check_determinism


class TestBuildMemoryExperiment:
    """Test cases for build_memory_experiment."""

    def test_perfect_spam_detector_count(self, css3):
        """Test detectors with noiseless bracketing rounds: 4 round pairs of 8 plus 4 final checks."""
        circuit = build_memory_experiment(css3, rounds=3, basis="X", spam=SpamMode.PERFECT)
        assert circuit.num_detectors == 36
        assert circuit.num_measurements == 5 * 8 + 9
        assert len(circuit.timesteps) == 1 + 5 * 6 + 1

    def test_noisy_spam_detector_count(self, css3):
        """Test detectors with noisy SPAM: 4 first-round, 2 pairs of 8 and 4 final checks."""
        circuit = build_memory_experiment(css3, rounds=3, basis="X", spam=SpamMode.NOISY)
        assert circuit.num_detectors == 24
        assert circuit.num_measurements == 3 * 8 + 9

    def test_observable_reads_logical_support(self, css3):
        """Test that the X-memory observable is the parity of the logical-X data measurements."""
        circuit = build_memory_experiment(css3, rounds=2, basis="X")
        assert circuit.num_observables == 1
        first_data = circuit.num_measurements - css3.num_data
        assert circuit.observables[0] == tuple(first_data + q for q in css3.logical_x.support)

    def test_detector_coordinates(self, css3):
        """Test that every detector carries (x, y, round) coordinates."""
        circuit = build_memory_experiment(css3, rounds=2, basis="Z")
        assert len(circuit.detector_coords) == circuit.num_detectors
        ancilla_coords = {s.coord for s in css3.stabilizers}
        assert all((x, y) in ancilla_coords for x, y, _ in circuit.detector_coords)

    def test_rejects_unsupported_basis(self, css3, xy3):
        """Test that CSS codes cannot run Y memory and XY codes cannot run Z memory."""
        with pytest.raises(ParameterError):
            build_memory_experiment(css3, rounds=1, basis="Y")
        with pytest.raises(ParameterError):
            build_memory_experiment(xy3, rounds=1, basis="Z")

    def test_rejects_zero_rounds(self, css3):
        """Test that rounds < 1 raise ParameterError."""
        with pytest.raises(ParameterError):
            build_memory_experiment(css3, rounds=0)

    def test_rejects_unknown_spam_mode(self, css3):
        """Test that an unknown SPAM mode raises ParameterError."""
        with pytest.raises(ParameterError):
            build_memory_experiment(css3, rounds=1, spam="sloppy")

    @pytest.mark.parametrize("basis", ["X", "Z"])
    @pytest.mark.parametrize("spam", list(SpamMode))
    def test_css_detectors_are_deterministic(self, css3, basis, spam):
        """Test that every CSS detector and the observable are fixed by the noiseless circuit."""
        report = check_determinism(build_memory_experiment(css3, rounds=2, basis=basis, spam=spam), shots=64)
        assert report.is_deterministic

    @pytest.mark.parametrize("basis", ["X", "Y"])
    def test_xy_detectors_are_deterministic(self, xy3, basis):
        """Test determinism for both XY memory bases."""
        report = check_determinism(build_memory_experiment(xy3, rounds=2, basis=basis), shots=64)
        assert report.is_deterministic

    @pytest.mark.parametrize("basis", ["X", "Y"])
    def test_deformed_detectors_are_deterministic(self, xy3_deformed, basis):
        """Test that the deformed bases keep every detector deterministic."""
        report = check_determinism(build_memory_experiment(xy3_deformed, rounds=2, basis=basis), shots=64)
        assert report.is_deterministic

    def test_rectangular_detectors_are_deterministic(self):
        """Test determinism on a rectangular patch."""
        circuit = build_memory_experiment(build_css(3, 5), rounds=2, basis="Z", spam=SpamMode.NOISY)
        assert check_determinism(circuit, shots=64).is_deterministic


class TestNoiseAttachment:
    """Test cases for attach_noise and memory_circuit."""

    def test_rounds_default_to_largest_dimension(self):
        """Test that memory_circuit runs max(d_x, d_z) noisy rounds."""
        layout = build_css(3, 5)
        default = memory_circuit(layout, NoiseModel(0.001), basis="Z", spam=SpamMode.NOISY)
        explicit = memory_circuit(layout, NoiseModel(0.001), rounds=5, basis="Z", spam=SpamMode.NOISY)
        assert default.num_detectors == explicit.num_detectors

    def test_perfect_spam_keeps_bracketing_rounds_noiseless(self, css3):
        """Test that no noise is attached to the first two timesteps with perfect SPAM."""
        circuit = memory_circuit(css3, NoiseModel(0.01), rounds=1, basis="X", spam=SpamMode.PERFECT)
        assert not circuit.timesteps[0].noise
        assert not circuit.timesteps[1].noise
        assert circuit.has_noise

    def test_noisy_spam_flips_data_measurements(self, css3):
        """Test that noisy SPAM gives the final data measurements a flip probability."""
        circuit = memory_circuit(css3, NoiseModel(0.03), rounds=1, basis="X", spam=SpamMode.NOISY)
        final = circuit.timesteps[-1].instructions
        data = [ins for ins in final if ins.is_measurement and ins.targets[0] < css3.num_data]
        assert data and all(ins.flip_probability == pytest.approx(0.02) for ins in data)

    def test_noiseless_model_attaches_nothing(self, css3):
        """Test that p = 0 leaves the circuit noiseless."""
        circuit = attach_noise(build_memory_experiment(css3, rounds=1), NoiseModel(0.0))
        assert not circuit.has_noise

    def test_without_noise(self, css3_circuit):
        """Test that without_noise strips channels and flip probabilities."""
        assert css3_circuit.has_noise
        assert not css3_circuit.without_noise().has_noise

    def test_two_qubit_channels_follow_gates(self, css3_circuit):
        """Test that every noisy two-qubit gate carries the 15-outcome channel."""
        sites = [site for _, site in css3_circuit.noise_sites() if len(site.qubits) == 2]
        assert sites
        assert all(len(site.outcomes) == 15 for site in sites)
        assert all(site.total_probability == pytest.approx(0.01) for site in sites)

    def test_to_text_lists_detectors_and_observables(self, css3_circuit):
        """Test the human-readable listing."""
        text = css3_circuit.to_text()
        assert text.startswith("qubits 17\n")
        assert "detector 0 (" in text
        assert "observable 0 :" in text
        assert "noise" in text


class TestCircuitValidation:
    """Test cases for Circuit.validate."""

    def test_qubit_used_twice_in_a_timestep(self):
        """Test that overlapping instructions raise ScheduleConflictError."""
        circuit = Circuit(
            num_qubits=2,
            timesteps=(Timestep((Instruction("CX", (0, 1)), Instruction("Idle", (1,)))),),
            detectors=(),
            observables=(),
        )
        with pytest.raises(ScheduleConflictError):
            circuit.validate()

    def test_detector_out_of_range(self):
        """Test that a detector naming a missing measurement raises ParameterError."""
        circuit = Circuit(
            num_qubits=1,
            timesteps=(Timestep((Instruction("MeasZ", (0,)),)),),
            detectors=((0, 1),),
            observables=(),
        )
        with pytest.raises(ParameterError):
            circuit.validate()
