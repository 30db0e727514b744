"""Shared fixtures."""

from __future__ import annotations

import numpy as np
import pytest

from tests.builders import generator


@pytest.fixture
def rng() -> np.random.Generator:
    return generator(1234)
