"""Integration tests for the code layout API endpoints."""
import pytest
from fastapi import status
from fastapi.testclient import TestClient


class TestCodeEndpoints:
    """Test cases for /api/codes."""

    def test_health(self, client: TestClient):
        """Test the health check."""
        response = client.get("/health")
        assert response.status_code == status.HTTP_200_OK
        assert response.json() == {"status": "ok"}

    def test_root_lists_families_and_decoders(self, client: TestClient):
        """Test that the root endpoint advertises what can be requested."""
        body = client.get("/").json()
        assert body["code_families"] == ["css", "xy", "xy-deformed"]
        assert "belief-matching" in body["decoders"]

    def test_startup_loads_coefficients(self, app, coefficient_service, mocker):
        """Test that the lifespan hook logs the loaded reference families."""
        info = mocker.patch("app.main.logger.info")
        with TestClient(app):
            pass
        assert any("rect_x" in call.args[0] for call in info.call_args_list)

    def test_css_layout(self, client: TestClient):
        """Test the distance-3 CSS layout export."""
        response = client.get("/api/codes/css", params={"d_x": 3})
        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["family"] == "css"
        assert (data["d_x"], data["d_z"]) == (3, 3)
        assert data["num_data"] == 9
        assert data["num_qubits"] == 17
        assert len(data["stabilizers"]) == 8
        assert {row["kind"] for row in data["stabilizers"]} == {"X", "Z"}
        assert set(data["logicals"]) >= {"X", "Z"}

    def test_rectangular_css_layout(self, client: TestClient):
        """Test that CSS layouts accept a separate d_z."""
        response = client.get("/api/codes/css", params={"d_x": 5, "d_z": 3})
        assert response.status_code == status.HTTP_200_OK
        assert response.json()["num_qubits"] == 2 * 5 * 3 - 1

    def test_deformed_layout_reports_deformation(self, client: TestClient):
        """Test that the deformed XY layout carries its per-qubit tags."""
        response = client.get("/api/codes/xy-deformed", params={"d_x": 3})
        assert response.status_code == status.HTTP_200_OK
        assert response.json()["deformation"]

    @pytest.mark.parametrize(
        "path,params",
        [
            ("/api/codes/xy", {"d_x": 3, "d_z": 5}),
            ("/api/codes/css", {"d_x": 4}),
            ("/api/codes/css", {"d_x": 1}),
        ],
    )
    def test_invalid_dimensions(self, client: TestClient, path, params):
        """Test that non-square XY, even and too small sizes are rejected with 422."""
        response = client.get(path, params=params)
        assert response.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY

    def test_unknown_family(self, client: TestClient):
        """Test that an unknown family is rejected by path validation."""
        response = client.get("/api/codes/hexagonal", params={"d_x": 3})
        assert response.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY
