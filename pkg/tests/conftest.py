"""Shared fixtures"""

import json
from pathlib import Path

import numpy as np
import pytest

from oblivious_perturbation.src.common.common_settings import Settings
from oblivious_perturbation.src.rng.rng_bit_source import BitSource
from oblivious_perturbation.src.experiment.experiment_files import json_ready

GOLDEN_DIRECTORY : Path = Path(__file__).parent / "golden"
SETTINGS_FIELDS : tuple[str, ...] = (
    "oracle_cap", "pattern_cache_dim", "stream_block_entries", "residual_cadence", "rejection_cap")

@pytest.fixture(autouse=True)
def restore_settings():
    """Restores global settings changed by a test"""
    saved = {name: getattr(Settings, name) for name in SETTINGS_FIELDS}
    yield
    for name, value in saved.items():
        setattr(Settings, name, value)

@pytest.fixture
def golden():
    """Compares a value against its committed file under tests/golden"""
    def check(name : str, value) -> None:
        path = GOLDEN_DIRECTORY / f"{name}.json"
        value = json.loads(json.dumps(json_ready(value)))
        if not path.exists():
            pytest.fail(f"golden file {path} is missing")
        assert json.loads(path.read_text(encoding="utf-8")) == value, f"{name} differs from {path}"
    return check

@pytest.fixture
def src(request):
    """Bit source seeded with the parameter, 0 when unparametrized"""
    return BitSource(getattr(request, "param", 0))

@pytest.fixture
def rng():
    """numpy generator for test data"""
    return np.random.default_rng(20240608)
