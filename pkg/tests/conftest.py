from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.arith import build_tables  # noqa: E402
from core.cache import clear_all  # noqa: E402


@pytest.fixture(autouse=True)
def _fresh_caches():
    clear_all()
    yield
    clear_all()


@pytest.fixture(scope="session")
def small_tables():
    """Tables on 1..20000 with d_3"""
    return build_tables(20_000, (3,))


@pytest.fixture(scope="session")
def voronoi_tables():
    """Enough for the divisor series at X = 25 (n <= 15625)"""
    return build_tables(15_626)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def million_tables():
    """Divisor series at X = 100 (n <= 10^6)"""
    return build_tables(1_000_000)
