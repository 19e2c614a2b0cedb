from pathlib import Path

import numpy as np
import pytest

from chirpedensemble.core.control import synthesize_standard
from chirpedensemble.core.frames import FrameContext
from chirpedensemble.core.model import EnsembleSystem, SampledSystem, sample_system

CONFIGS_DIR = Path(__file__).resolve().parents[1] / "configs"

# Four-level example: lambda(alpha) = (0, 1 + alpha, 3 + 2 alpha, 7)
FOUR_LEVEL_OFFSETS = [0.0, 1.0, 3.0, 7.0]
FOUR_LEVEL_COEFFICIENTS = [[0.0], [1.0], [2.0], [0.0]]
FOUR_LEVEL_COUPLING = [
    [1.0, 1.0, 1.0, 0.0],
    [1.0, 1.0, 2.0, 0.0],
    [1.0, 2.0, 1.0, 3.0],
    [0.0, 0.0, 3.0, 1.0],
]
FOUR_LEVEL_EPS1 = 10 ** (-5 / 3)
FOUR_LEVEL_EPS2 = 10 ** (-7 / 3)


@pytest.fixture
def configs_dir() -> Path:
    return CONFIGS_DIR


@pytest.fixture
def four_level_ensemble() -> EnsembleSystem:
    return EnsembleSystem.affine(FOUR_LEVEL_OFFSETS, FOUR_LEVEL_COEFFICIENTS, FOUR_LEVEL_COUPLING, [[-0.6, 0.3]])


@pytest.fixture
def four_level_pulse():
    return synthesize_standard(3.0, 5.0, FOUR_LEVEL_EPS1, FOUR_LEVEL_EPS2)


@pytest.fixture
def four_level_context(four_level_ensemble) -> FrameContext:
    """(3, 4) inversion at alpha = -0.1 with eps1 = eps2 = 0.1 (horizon 100)."""
    sys = sample_system(four_level_ensemble, -0.1)
    return FrameContext.build(sys, synthesize_standard(3.0, 5.0, 0.1, 0.1), 3, 4)


@pytest.fixture
def two_level_system() -> SampledSystem:
    return SampledSystem(np.array([0.0, 4.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def two_level_context(two_level_system) -> FrameContext:
    return FrameContext.build(two_level_system, synthesize_standard(3.0, 5.0, 0.1, 0.1), 1, 2)


@pytest.fixture
def small_config_dict() -> dict:
    """Cheap two-level sweep: horizon 100, a few thousand steps per run."""
    return {
        "system": {
            "offsets": [0.0, 4.0],
            "coefficients": [[0.0], [1.0]],
            "coupling": [[0.0, 1.0], [1.0, 0.0]],
            "box": [[-0.3, 0.3]],
            "alphas": [-0.2, 0.0, 0.2],
        },
        "pulse": {"segments": [{"v0": 3.0, "v1": 5.0}]},
        "run": {
            "eps1": 0.1,
            "eps2": 0.1,
            "p": 1,
            "q": 2,
            "steps_per_period": 20,
            "n_samples": 51,
        },
    }


@pytest.fixture
def output_dir(tmp_path) -> Path:
    return tmp_path / "out"
