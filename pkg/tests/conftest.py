from pathlib import Path
import pytest

import numpy as np

from subreak import (build_custom_model, build_ladder_model,
                     build_lieb_mattis_model)


@pytest.fixture(scope='session')
def cwd():
    return Path(__file__).parents[0]


@pytest.fixture(scope='session')
def ladder_100():
    """Ladder model with N = 100 and 64 levels"""
    return build_ladder_model(100, 64)


@pytest.fixture(scope='session')
def ladder_small():
    """Small ladder model for propagator comparisons"""
    return build_ladder_model(64, 16)


@pytest.fixture(scope='session')
def lieb_mattis_8():
    """Complete Lieb-Mattis tower of 8 spins"""
    return build_lieb_mattis_model(8, 5)


@pytest.fixture(scope='session')
def two_level():
    """Degenerate two-level model whose second level grows at rate 1 under
    o = 1"""
    return build_custom_model(2, [0.0, 0.0], np.diag([0.0, -1.0]))
