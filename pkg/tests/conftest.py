"""Shared fixtures and small helpers for the test suite."""

import numpy as np
import pytest

from jamsense.dataset import WindowSample
from jamsense.scenario import ScenarioConfig, TimeSeriesRun


def make_window(rng, w=50, label=1, origin=("run", 0)):
    return WindowSample(
        rssi=rng.normal(size=w),
        sinr=rng.normal(size=w),
        label=label,
        origin=origin,
    )


def make_run(rng, n=600, label=False, config=None, seed=0):
    config = config or ScenarioConfig(
        duration_s=n / 100.0, n_attackers=1 if label else 0, allow_off_grid=True
    )
    return TimeSeriesRun(
        rssi_dbm=rng.normal(-80.0, 3.0, n),
        sinr_db=rng.normal(10.0, 2.0, n) + (-8.0 if label else 0.0),
        label=label,
        config=config,
        seed=seed,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)
