"""Unit tests for the decoders and the circuit-level distance searches."""
import numpy as np
import pytest

from app.core.exceptions import CorrectionMismatchError, DimensionError, ParameterError
from app.schemas.decoder import BPConfig, DecoderName, DecoderSpec
from app.services import decoders as decoders_module
from app.services.bp import BPBatchResult
from app.services.decoders import BeliefDecoder, MatchingDecoder, belief_decode, build_decoder
from app.services.dem import DetectorErrorModel, ErrorMechanism
from app.services.distance import (
    circuit_distance,
    find_undetectable_logical,
    graphlike_distance,
    min_undetectable_weight,
    verify_fault_correction,
)
from app.services.mwpm import MatchingResult


@pytest.fixture
def shortcut_dem(chain_dem) -> DetectorErrorModel:
    """The chain plus an undecomposed three-detector mechanism that shortens the lightest logical to 3."""
    return DetectorErrorModel(
        num_detectors=3,
        num_observables=1,
        mechanisms=chain_dem.mechanisms + (ErrorMechanism(0.01, (0, 1, 2), (0,)),),
    )


class TestMatchingDecoder:
    """Test cases for MatchingDecoder."""

    @pytest.mark.parametrize("matcher", [DecoderName.MWPM, DecoderName.UF])
    def test_boundary_defect_predicts_flip(self, chain_dem, matcher):
        """Test that D0 alone is explained by the observable-flipping boundary edge."""
        decoder = MatchingDecoder(chain_dem, matcher, validate=True)
        outcome = decoder.decode(np.array([True, False, False]))
        assert outcome.predicted.tolist() == [True]
        assert outcome.correction == (0,)
        assert outcome.bp_converged is None

    @pytest.mark.parametrize("matcher", [DecoderName.MWPM, DecoderName.UF])
    def test_bulk_pair_predicts_no_flip(self, chain_dem, matcher):
        """Test that D0 D1 is explained by the edge between them."""
        outcome = MatchingDecoder(chain_dem, matcher).decode(np.array([True, True, False]))
        assert outcome.predicted.tolist() == [False]
        assert outcome.correction == (1,)
        assert outcome.matched_weight == pytest.approx(-np.log(0.1))

    def test_empty_syndrome_skips_the_matcher(self, chain_dem, mocker):
        """Test that trivial syndromes are answered without matching."""
        spy = mocker.spy(decoders_module, "mwpm_decode")
        outcome = MatchingDecoder(chain_dem).decode(np.zeros(3, dtype=bool))
        assert outcome.predicted.tolist() == [False]
        spy.assert_not_called()

    def test_predict_batch(self, chain_dem):
        """Test the (shots, observables) prediction array."""
        decoder = MatchingDecoder(chain_dem)
        predicted = decoder.predict(np.array([[1, 0, 0], [1, 1, 0], [0, 0, 0]], dtype=bool))
        assert predicted.tolist() == [[True], [False], [False]]
        assert decoder.predict(np.zeros((0, 3), dtype=bool)).shape == (0, 1)

    def test_syndrome_length_mismatch(self, chain_dem):
        """Test that a syndrome of the wrong length raises DimensionError."""
        with pytest.raises(DimensionError):
            MatchingDecoder(chain_dem).decode(np.zeros(4, dtype=bool))

    def test_validation_catches_bad_corrections(self, chain_dem, mocker):
        """Test that a correction with another syndrome raises CorrectionMismatchError."""
        decoder = MatchingDecoder(chain_dem, validate=True)
        wrong = MatchingResult(edges=(decoder.graph.edge_index(1, 2),), weight=1.0)
        mocker.patch("app.services.decoders.mwpm_decode", return_value=wrong)
        with pytest.raises(CorrectionMismatchError):
            decoder.decode(np.array([True, True, False]))


class TestBeliefDecoder:
    """Test cases for belief-matching and belief-find."""

    @pytest.mark.parametrize("matcher", [DecoderName.MWPM, DecoderName.UF])
    def test_converged_bp_skips_the_matcher(self, chain_dem, matcher, mocker):
        """Test that a converged BP hard decision is returned without matching."""
        mwpm = mocker.spy(decoders_module, "mwpm_decode")
        uf = mocker.spy(decoders_module, "uf_decode")
        outcome = BeliefDecoder(chain_dem, matcher, validate=True).decode(np.array([True, True, False]))
        assert outcome.bp_converged is True
        assert outcome.correction == (1,)
        assert outcome.predicted.tolist() == [False]
        mwpm.assert_not_called()
        uf.assert_not_called()

    def test_unconverged_bp_falls_back_to_matching(self, chain_dem, mocker):
        """Test that without convergence the reweighted graph is matched once."""
        stalled = BPBatchResult(
            posteriors=chain_dem.priors[None, :].copy(),
            llrs=np.zeros((1, 4)),
            hard_decisions=np.zeros((1, 4), dtype=bool),
            converged=np.array([False]),
            iterations_used=np.array([30]),
            mean_posteriors=chain_dem.priors[None, :].copy(),
        )
        mocker.patch("app.services.decoders.run_bp_batch", return_value=stalled)
        spy = mocker.spy(decoders_module, "mwpm_decode")
        outcome = BeliefDecoder(chain_dem).decode(np.array([True, False, False]))
        spy.assert_called_once()
        assert outcome.bp_converged is False
        assert outcome.bp_iterations == 30
        assert outcome.predicted.tolist() == [True]

    def test_belief_find_falls_back_to_union_find(self, chain_dem, mocker):
        """Test that belief-find hands unconverged syndromes to union-find on the reweighted graph."""
        stalled = BPBatchResult(
            posteriors=chain_dem.priors[None, :].copy(),
            llrs=np.zeros((1, 4)),
            hard_decisions=np.zeros((1, 4), dtype=bool),
            converged=np.array([False]),
            iterations_used=np.array([30]),
            mean_posteriors=chain_dem.priors[None, :].copy(),
        )
        mocker.patch("app.services.decoders.run_bp_batch", return_value=stalled)
        spy = mocker.spy(decoders_module, "uf_decode")
        outcome = BeliefDecoder(chain_dem, DecoderName.UF).decode(np.array([False, True, True]))
        spy.assert_called_once()
        assert outcome.predicted.tolist() == [False]

    def test_converged_loop_is_pruned(self, mocker):
        """Test that a converged decision carrying an observable-flipping loop is cut to its cheapest subset."""
        dem = DetectorErrorModel(
            num_detectors=3,
            num_observables=1,
            mechanisms=(
                ErrorMechanism(0.1, (0,)),
                ErrorMechanism(0.01, (0, 1), (0,)),
                ErrorMechanism(0.01, (1,)),
                ErrorMechanism(0.1, (2,)),
            ),
        )
        looped = BPBatchResult(
            posteriors=np.full((1, 4), 0.9),
            llrs=np.full((1, 4), -2.0),
            hard_decisions=np.ones((1, 4), dtype=bool),
            converged=np.array([True]),
            iterations_used=np.array([3]),
            mean_posteriors=np.full((1, 4), 0.9),
        )
        mocker.patch("app.services.decoders.run_bp_batch", return_value=looped)
        outcome = BeliefDecoder(dem, validate=True).decode(np.array([False, False, True]))
        assert outcome.bp_converged is True
        assert outcome.correction == (3,)
        assert outcome.predicted.tolist() == [False]

    def test_fallback_reweights_from_mean_posteriors(self, chain_dem, mocker):
        """Test that the matcher sees the iteration-averaged posteriors, not the last ones."""
        # last iteration blames the right boundary, the average blames the left one
        stalled = BPBatchResult(
            posteriors=np.array([[0.01, 0.45, 0.45, 0.45]]),
            llrs=np.zeros((1, 4)),
            hard_decisions=np.zeros((1, 4), dtype=bool),
            converged=np.array([False]),
            iterations_used=np.array([30]),
            mean_posteriors=np.array([[0.45, 0.01, 0.01, 0.01]]),
        )
        mocker.patch("app.services.decoders.run_bp_batch", return_value=stalled)
        outcome = BeliefDecoder(chain_dem, validate=True).decode(np.array([True, False, False]))
        assert outcome.correction == (0,)
        assert outcome.predicted.tolist() == [True]

    def test_mixed_batch(self, chain_dem):
        """Test that empty and non-empty rows come back in input order."""
        decoder = BeliefDecoder(chain_dem)
        outcomes = decoder.decode_batch(np.array([[0, 0, 0], [1, 0, 0], [0, 0, 0]], dtype=bool))
        assert [o.predicted.tolist() for o in outcomes] == [[False], [True], [False]]
        assert outcomes[0].bp_converged is None

    def test_belief_decode(self, chain_dem):
        """Test the one-shot helper."""
        outcome = belief_decode(chain_dem, np.array([True, False, False]), bp=BPConfig(max_iter=5))
        assert outcome.predicted.tolist() == [True]


class TestBuildDecoder:
    """Test cases for build_decoder."""

    @pytest.mark.parametrize(
        "name,cls,matcher",
        [
            ("mwpm", MatchingDecoder, DecoderName.MWPM),
            ("uf", MatchingDecoder, DecoderName.UF),
            ("belief-matching", BeliefDecoder, DecoderName.MWPM),
            ("belief-find", BeliefDecoder, DecoderName.UF),
        ],
    )
    def test_names(self, chain_dem, name, cls, matcher):
        """Test dispatch for every decoder name."""
        decoder = build_decoder(chain_dem, name)
        assert type(decoder) is cls
        assert decoder.matcher_name is matcher

    def test_spec_carries_bp_config(self, chain_dem):
        """Test that the BP parameters of a DecoderSpec reach the decoder."""
        spec = DecoderSpec(name=DecoderName.BELIEF_MATCHING, bp=BPConfig(max_iter=7))
        assert build_decoder(chain_dem, spec).bp.max_iter == 7

    def test_unknown_name(self, chain_dem):
        """Test that an unknown decoder raises ParameterError."""
        with pytest.raises(ParameterError):
            build_decoder(chain_dem, "tensor-network")

    def test_decoder_name_properties(self):
        """Test the BP flag and matcher of each name."""
        assert DecoderName.BELIEF_FIND.uses_bp
        assert not DecoderName.UF.uses_bp
        assert DecoderName.BELIEF_FIND.matcher is DecoderName.UF
        assert DecoderName.BELIEF_MATCHING.matcher is DecoderName.MWPM


class TestDistance:
    """Test cases for graphlike and exhaustive distance searches."""

    def test_chain_graphlike_distance(self, chain_dem):
        """Test that the chain's only logical uses all four edges."""
        assert graphlike_distance(chain_dem) == 4

    def test_exhaustive_search(self, chain_dem):
        """Test the mechanism set and weight found by iterative deepening."""
        assert find_undetectable_logical(chain_dem, 4) == (0, 1, 2, 3)
        assert min_undetectable_weight(chain_dem, 3) is None
        assert min_undetectable_weight(chain_dem, 4) == 4

    def test_circuit_distance_certified(self, chain_dem):
        """Test that the graphlike bound is certified when nothing lighter exists."""
        result = circuit_distance(chain_dem)
        assert result.distance == 4
        assert result.certified

    def test_hyperedge_shortens_distance(self, shortcut_dem):
        """Test that the exhaustive search finds a logical lighter than the graphlike one."""
        result = circuit_distance(shortcut_dem)
        assert result.graphlike == 4
        assert result.distance == 3
        assert find_undetectable_logical(shortcut_dem, 3) == (1, 3, 4)

    def test_partial_search_is_not_certified(self, chain_dem):
        """Test that a truncated search leaves the bound uncertified."""
        result = circuit_distance(chain_dem, exhaustive_below=2)
        assert result.distance == 4
        assert not result.certified

    def test_no_logical(self):
        """Test that a model without observables has no graphlike distance."""
        dem = DetectorErrorModel(2, 0, (ErrorMechanism(0.1, (0, 1)),))
        assert graphlike_distance(dem) is None
        with pytest.raises(ParameterError):
            circuit_distance(dem)

    def test_max_weight_must_be_positive(self, chain_dem):
        """Test that max_weight < 1 raises ParameterError."""
        with pytest.raises(ParameterError):
            find_undetectable_logical(chain_dem, 0)

    def test_css3_circuit_distance(self, css3_dem):
        """Test that the distance-3 CSS memory circuit keeps distance 3."""
        assert graphlike_distance(css3_dem) == 3
        assert min_undetectable_weight(css3_dem, 2) is None


class TestFaultCheck:
    """Test cases for verify_fault_correction."""

    def test_single_faults_on_the_chain(self, chain_dem):
        """Test that every single chain mechanism is corrected."""
        report = verify_fault_correction(chain_dem, MatchingDecoder(chain_dem), order=1)
        assert report.checked == 4
        assert report.passed

    def test_pairs_on_the_chain_fail(self, chain_dem):
        """Test that some weight-2 faults beat a distance-4 chain decoder."""
        report = verify_fault_correction(chain_dem, MatchingDecoder(chain_dem), order=2)
        assert report.checked > 0
        assert not report.passed

    def test_pair_subsampling(self, css3_dem):
        """Test that sample_limit caps the number of checked pairs."""
        report = verify_fault_correction(css3_dem, MatchingDecoder(css3_dem), order=2, sample_limit=25, seed=1)
        assert report.checked == 25

    def test_bad_order(self, chain_dem):
        """Test that orders other than 1 and 2 raise ParameterError."""
        with pytest.raises(ParameterError):
            verify_fault_correction(chain_dem, MatchingDecoder(chain_dem), order=3)
