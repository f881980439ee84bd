"""Unit tests for the bundled reference coefficients."""
import json

import pytest

from app.core.exceptions import ParameterError
from app.schemas.analysis import AnsatzFamily
from app.services.coefficients import CoefficientService, get_coefficient_service


class TestCoefficientService:
    """Test cases for CoefficientService."""

    def test_bundled_values(self, coefficient_service):
        """Test the reference xy, rect_x and rect_z coefficients."""
        xy = coefficient_service.get("xy")
        assert (xy.a, xy.b, xy.eta) == (0.0419, 24.76, 100.0)
        assert coefficient_service.get(AnsatzFamily.RECT_X).b == 42.30
        assert coefficient_service.get(AnsatzFamily.RECT_Z).a == 0.0527

    def test_all(self, coefficient_service):
        """Test that all() keys every family by its enum."""
        assert set(coefficient_service.all()) == set(AnsatzFamily)

    def test_singleton(self, coefficient_service):
        """Test that the accessor returns the shared instance."""
        assert get_coefficient_service() is coefficient_service

    def test_missing_family(self, coefficient_service):
        """Test that a family without data raises ParameterError."""
        service = CoefficientService(_data={"xy": {"family": "xy", "a": 0.04, "b": 25.0}})
        with pytest.raises(ParameterError):
            service.get("rect_z")

    def test_unknown_family(self, coefficient_service):
        """Test that an unknown family name raises ValueError."""
        with pytest.raises(ValueError):
            coefficient_service.get("hexagonal")

    def test_invalid_data(self, coefficient_service):
        """Test that a negative coefficient raises RuntimeError."""
        service = CoefficientService(_data={"xy": {"family": "xy", "a": -1.0, "b": 25.0}})
        with pytest.raises(RuntimeError):
            service.get("xy")

    def test_custom_file(self, coefficient_service, tmp_path):
        """Test loading coefficients from another file."""
        path = tmp_path / "coefficients.json"
        path.write_text(json.dumps({"coefficients": {"xy": {"family": "xy", "a": 0.05, "b": 20.0}}}))
        assert CoefficientService(data_file=path).get("xy").a == 0.05

    def test_missing_file(self, coefficient_service, tmp_path):
        """Test that a missing file raises RuntimeError."""
        with pytest.raises(RuntimeError, match="not found"):
            CoefficientService(data_file=tmp_path / "absent.json")

    def test_bad_json(self, coefficient_service, tmp_path):
        """Test that malformed JSON raises RuntimeError."""
        path = tmp_path / "broken.json"
        path.write_text("{coefficients:")
        with pytest.raises(RuntimeError, match="Invalid JSON"):
            CoefficientService(data_file=path)
