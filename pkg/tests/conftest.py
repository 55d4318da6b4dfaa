"""Shared fixtures: seeded RNG and random interior-point helpers."""

from __future__ import annotations

import numpy as np
import pytest

SEED = 20260816


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def random_disk_points(rng, n, max_radius=0.95):
    r = max_radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return r * np.exp(1j * theta)


def random_halfplane_points(rng, n, scale=3.0):
    x = rng.uniform(0.05, scale, n)
    y = rng.uniform(-scale, scale, n)
    return x + 1j * y
