"""Shared fixtures for the test suite."""

from __future__ import annotations

import pytest


@pytest.fixture
def quiet_standing_series():
    """Thirty 10 Hz samples of gravity-aligned stillness."""
    return [(t * 100, (0.0, 0.0, 9.81)) for t in range(30)]
