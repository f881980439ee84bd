"""Pytest configuration and fixtures."""
from pathlib import Path
import sys

import pytest
from fastapi import FastAPI
from fastapi.testclient import TestClient

# Add the project root to the Python path
sys.path.append(str(Path(__file__).parent.parent))

from app.services.circuit import Circuit, memory_circuit
from app.services.codes import SurfaceCodeLayout, build_css, build_xy, build_xy_deformed
from app.services.coefficients import CoefficientService
from app.services.dem import DetectorErrorModel, ErrorMechanism, build_dem
from app.services.noise import NoiseModel
from app.schemas.experiment import CodeSpec, ExperimentSpec, MonteCarloPoint


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="Run long Monte Carlo checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo check, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# Layouts

@pytest.fixture(scope="session")
def css3() -> SurfaceCodeLayout:
    """Distance-3 square CSS layout."""
    return build_css(3, 3)


@pytest.fixture(scope="session")
def xy3() -> SurfaceCodeLayout:
    """Distance-3 XY layout."""
    return build_xy(3)


@pytest.fixture(scope="session")
def xy3_deformed() -> SurfaceCodeLayout:
    """Distance-3 XY layout with deformed boundaries."""
    return build_xy_deformed(3)[0]


# Circuits and detector error models

@pytest.fixture(scope="session")
def css3_circuit(css3) -> Circuit:
    """Noisy X-memory circuit on the distance-3 CSS code, 3 rounds, perfect SPAM."""
    return memory_circuit(css3, NoiseModel(0.01), rounds=3, basis="X")


@pytest.fixture(scope="session")
def css3_dem(css3_circuit) -> DetectorErrorModel:
    """Decomposed DEM of ``css3_circuit``."""
    return build_dem(css3_circuit, decompose=True)


@pytest.fixture(scope="session")
def xy3_dem(xy3) -> DetectorErrorModel:
    """Decomposed DEM of a biased-noise X-memory circuit on the distance-3 XY code."""
    circuit = memory_circuit(xy3, NoiseModel(0.01, eta=100.0), rounds=3, basis="X")
    return build_dem(circuit, decompose=True)


@pytest.fixture
def chain_dem() -> DetectorErrorModel:
    """
    Repetition-code chain: boundary - D0 - D1 - D2 - boundary.

    The left boundary edge flips L0, so the lightest undetectable logical
    uses all four edges.
    """
    return DetectorErrorModel(
        num_detectors=3,
        num_observables=1,
        mechanisms=(
            ErrorMechanism(0.1, (0,), (0,)),
            ErrorMechanism(0.1, (0, 1)),
            ErrorMechanism(0.1, (1, 2)),
            ErrorMechanism(0.1, (2,)),
        ),
    )


# Monte Carlo records

@pytest.fixture
def make_point():
    """Factory for MonteCarloPoint records with a prescribed failure rate."""
    def _make(d_x, p, rate, shots=10**10, family="css", d_z=None, eta=1.0, basis="X", spam="perfect", seed=0):
        spec = ExperimentSpec(
            code=CodeSpec(family=family, d_x=d_x, d_z=d_z),
            p=p,
            eta=eta,
            basis=basis,
            spam=spam,
            shots=shots,
            seed=seed,
        )
        return MonteCarloPoint(spec=spec, shots=shots, failures=int(round(rate * shots)), seed=seed)
    return _make


# Services

@pytest.fixture
def coefficient_service():
    """CoefficientService reading the bundled reference coefficients."""
    CoefficientService._instance = None
    CoefficientService._initialized = False
    service = CoefficientService()
    yield service
    CoefficientService._instance = None
    CoefficientService._initialized = False


# API

@pytest.fixture
def app() -> FastAPI:
    """Create a test FastAPI application."""
    from app.main import app as fastapi_app
    return fastapi_app


@pytest.fixture
def client(app: FastAPI) -> TestClient:
    """Create a test client for the FastAPI application."""
    return TestClient(app)
