from pathlib import Path

import pytest

from invsurf.grid import ParamGrid

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def configs_dir():
    return CONFIGS


@pytest.fixture
def unit_grid():
    return ParamGrid.from_bounds((0.0, 1.0), (0.0, 2.0), 21, 41)
