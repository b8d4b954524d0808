"""Session fixtures: builtin pairs and lazily cached desk-scale campaigns.

The desk-scale campaigns (20 paths x 50 waypoints, seed 0) are shared
by the acceptance tests and several module tests; each environment's
campaign runs at most once per session.
"""
from __future__ import annotations

import os
import time
from pathlib import Path
from types import SimpleNamespace

import pytest

from rdwbench import CampaignConfig, builtin_pair, run_campaign

DESK_PATHS = 20
DESK_WAYPOINTS = 50
CAMPAIGN_SEED = 0
WORKERS = max(1, min(4, os.cpu_count() or 1))


@pytest.fixture(scope="session")
def pair_a():
    return builtin_pair("A")


@pytest.fixture(scope="session")
def pair_b():
    return builtin_pair("B")


@pytest.fixture(scope="session")
def pair_c():
    return builtin_pair("C")


@pytest.fixture(scope="session")
def desk_campaign(tmp_path_factory):
    """Getter: desk_campaign("C") -> namespace(result, out, elapsed_s)."""
    cache: dict[str, SimpleNamespace] = {}

    def get(name: str) -> SimpleNamespace:
        if name not in cache:
            out = tmp_path_factory.mktemp(f"campaign_{name}") / "run"
            config = CampaignConfig(
                pair=name, n_paths=DESK_PATHS, n_waypoints=DESK_WAYPOINTS,
                seed=CAMPAIGN_SEED, output_dir=str(out), workers=WORKERS)
            t0 = time.perf_counter()
            result = run_campaign(config)
            cache[name] = SimpleNamespace(
                result=result, out=Path(out),
                elapsed_s=time.perf_counter() - t0)
        return cache[name]

    return get
