import json
from pathlib import Path

import numpy as np
import pytest

from models import CorrelationModel
from runners import verify_runner
from track_pattern import CouplingSpec, FieldForm, GaussianPacket, GridSpec, Potential

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_model():
    return CorrelationModel.constant(2, 1.0)


@pytest.fixture
def grid():
    return GridSpec(-20.0, 20.0, 1024)


@pytest.fixture
def packet():
    return GaussianPacket(center=2.0, width=0.5)


@pytest.fixture
def harmonic():
    return CouplingSpec(potential=Potential("harmonic", 1.0))


@pytest.fixture
def gaussian_coupling():
    return CouplingSpec(
        potential=Potential("harmonic", 1.0),
        lambda_x=FieldForm("gaussian", value=0.5, center=0.0, width=1.5),
    )


def synthetic_series(a: float, seed: int = 7, index: int = 0, n_steps: int = 5000,
                     dt: float = 4e-6):
    return verify_runner.synthetic_series(a, seed, index, n_steps=n_steps, dt=dt)


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario dict (or raw text) to a file and return its path."""
    def _write(document, name: str = "scenario.json") -> Path:
        path = tmp_path / name
        text = document if isinstance(document, str) else json.dumps(document, indent=2)
        path.write_text(text, encoding="utf-8")
        return path
    return _write


@pytest.fixture
def diffusion_document():
    return {
        "kind": "diffusion",
        "seed": 42,
        "diffusion": {"p0": [0.3, 0.7], "model": {"kind": "constant", "a": 1.0},
                      "n_trajectories": 1000},
    }
