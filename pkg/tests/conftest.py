from pathlib import Path

import numpy as np
import pytest

CIRCUITS = Path(__file__).resolve().parent.parent / "circuits"


@pytest.fixture
def circuits_dir():
    return CIRCUITS


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
