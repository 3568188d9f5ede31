"""Pytest configuration and shared fixtures."""

import sys
from pathlib import Path
from typing import Dict

import numpy as np
import pytest
import yaml

sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))

from model import ChannelParams, build_params  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: Monte-Carlo acceptance runs with 10^5 or more samples"
    )


@pytest.fixture
def symmetric_params() -> ChannelParams:
    """P = N = a = 1 with unbounded states."""
    return build_params(1, 1, 1, 1, 1, 1)


@pytest.fixture
def gaussian_state_params() -> ChannelParams:
    """P = N = a = 1 with unit-variance Gaussian states."""
    return build_params(1, 1, 1, 1, 1, 1, 1.0, 1.0)


@pytest.fixture
def boundary_params() -> ChannelParams:
    """Decoder 1 exactly on the imbalanced boundary N1 = 9, decoder 2 balanced."""
    return build_params(100, 1, 9, 9, 1, 1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def sample_scenario() -> Dict:
    """Scenario mapping for the symmetric unit channel."""
    return {
        "p1": 1,
        "p2": 1,
        "n1": 1,
        "n2": 1,
        "a12": 1,
        "a21": 1,
        "q1": "unbounded",
        "q2": "unbounded",
    }


@pytest.fixture
def sample_engine_config() -> Dict:
    """Engine configuration with small Monte-Carlo budgets."""
    return {
        "version": "1.0",
        "envelope": {"grid_density": 128, "boost_cap": 100.0},
        "simulation": {
            "chunk_size": 1000,
            "workers": 1,
            "default_trials": 2000,
            "default_seed": 0,
        },
        "lattice": {"mc_samples": 20000, "mc_seed": 0},
        "logging": {"level": "WARNING", "json_format": False},
    }


@pytest.fixture
def temp_config_dir(tmp_path, sample_scenario, sample_engine_config) -> Path:
    """Temporary config directory with engine.yaml and a few scenarios."""
    config_dir = tmp_path / "config"
    scenarios = config_dir / "scenarios"
    scenarios.mkdir(parents=True)

    (config_dir / "engine.yaml").write_text(yaml.dump(sample_engine_config))
    (scenarios / "symmetric_unit.yaml").write_text(yaml.dump(sample_scenario))

    weak = dict(sample_scenario, n1=2)
    (scenarios / "weak_interference.yaml").write_text(yaml.dump(weak))

    binning = dict(sample_scenario, q1=2.0, q2=2.0)
    (scenarios / "binning.yaml").write_text(yaml.dump(binning))

    boundary = dict(sample_scenario, p1=100, n1=9, n2=9)
    (scenarios / "imbalanced.yaml").write_text(yaml.dump(boundary))

    # decoder 1 falls between the imbalanced and balanced conditions
    gap = dict(sample_scenario, n1=0.5, a12=4, a21=4)
    (scenarios / "no_regime.yaml").write_text(yaml.dump(gap))

    simulate = dict(
        sample_scenario,
        q1=1.0,
        q2=1.0,
        lattice={"family": "integer-cubic", "dim": 1},
        simulation={"scheme": "thm2-corner-R2", "decoder": 1, "trials": 3000, "seed": 7},
    )
    (scenarios / "simulate.yaml").write_text(yaml.dump(simulate))
    return config_dir
