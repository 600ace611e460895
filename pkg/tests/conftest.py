"""Shared fixtures. The expensive simulation campaigns (regime sweeps, the
maximum search, the width sweep) are session-scoped so the acceptance tests
and property tests share one set of runs.

Set TUNNELCLOCK_TEST_CACHE to a directory to persist those campaign results
between test sessions (useful when iterating on assertions; delete the
directory after any solver change).
"""

import os
import pickle
from pathlib import Path

import numpy as np
import pytest

import tunnelclock as tc


def _cached(key, builder):
    cache_dir = os.environ.get("TUNNELCLOCK_TEST_CACHE")
    if not cache_dir:
        return builder()
    path = Path(cache_dir) / f"{key}.pkl"
    if path.exists():
        with open(path, "rb") as fh:
            return pickle.load(fh)
    value = builder()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        pickle.dump(value, fh)
    return value


@pytest.fixture(scope="session")
def grid():
    return tc.make_grid(-60.0, 60.0, 4096)


@pytest.fixture(scope="session")
def v2_run():
    """Default-numerics v=2 collision with its boundary record."""
    def build():
        record = tc.BoundaryRecord()
        result = tc.run_scenario(tc.ScenarioConfig(v=2.0), record=record)
        return result, record
    return _cached("v2_run", build)


@pytest.fixture(scope="session")
def regime1_sweep():
    v_list = [round(0.15 + 0.05 * i, 10) for i in range(9)]  # 0.15 .. 0.55
    return _cached(
        "regime1_sweep", lambda: tc.velocity_sweep(2.0, 1.0, 2.0, v_list)
    )


@pytest.fixture(scope="session")
def regime2_sweep():
    v_list = [round(0.65 + 0.05 * i, 10) for i in range(28)]  # 0.65 .. 2.00
    return _cached(
        "regime2_sweep", lambda: tc.velocity_sweep(2.0, 1.0, 2.0, v_list)
    )


@pytest.fixture(scope="session")
def regime3_sweep():
    v_list = [round(2.15 + 0.05 * i, 10) for i in range(38)]  # 2.15 .. 4.00
    return _cached(
        "regime3_sweep", lambda: tc.velocity_sweep(2.0, 1.0, 2.0, v_list)
    )


@pytest.fixture(scope="session")
def max_search():
    return _cached("max_search", lambda: tc.find_max_tunneling_time(2.0, 1.0, 2.0))


@pytest.fixture(scope="session")
def width_sweep_result():
    """Coarse 0.1-step width sweep refined at 0.025 around the v_m jump."""
    def build():
        coarse = [round(0.4 + 0.1 * i, 10) for i in range(13)]  # 0.4 .. 1.6
        first = tc.width_sweep(2.0, 2.0, coarse, "Rb87")
        cache = {r.w: (r.dt_max, r.v_m) for r in first.ok_rows()}
        lo, hi = first.w_c - 0.15, first.w_c + 0.15
        refined = sorted(
            set(coarse)
            | {round(lo + 0.025 * i, 10) for i in range(int((hi - lo) / 0.025) + 1)}
        )
        return tc.width_sweep(2.0, 2.0, refined, "Rb87", cache=cache)
    return _cached("width_sweep", build)
