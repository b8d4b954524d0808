"""Mean-clearance complexity scores and pair ratios."""
from __future__ import annotations

import math

import pytest

from rdwbench import (
    Environment,
    EnvironmentPair,
    Polygon,
    builtin_pair,
    complexity_ratio,
    environment_complexity,
)

NORTH = math.pi / 2

# frozen production values at the default 0.5 m grid (see decision ledger)
RATIO_B = 1.1691850472198255
RATIO_C = 1.5606516948579223


def test_ratio_pair_a_exactly_one(pair_a):
    report = complexity_ratio(pair_a)
    assert report.ratio == 1.0
    assert report.sample_counts == (400, 400)
    assert report.c_physical == report.c_virtual
    assert report.c_physical == pytest.approx(1.675, abs=1e-9)


def test_ratio_pair_b(pair_b):
    report = complexity_ratio(pair_b)
    assert report.ratio == pytest.approx(RATIO_B, abs=1e-9)
    assert abs(report.ratio - 1.170) <= 0.06
    assert report.sample_counts == (432, 600)


def test_ratio_pair_c(pair_c):
    report = complexity_ratio(pair_c)
    assert report.ratio == pytest.approx(RATIO_C, abs=1e-9)
    assert abs(report.ratio - 1.625) <= 0.09
    assert report.sample_counts == (336, 1312)
    assert report.c_physical == pytest.approx(0.795395, abs=1e-5)
    assert report.c_virtual == pytest.approx(1.010934, abs=1e-5)


def test_ratio_ordering(pair_a, pair_b, pair_c):
    ra = complexity_ratio(pair_a).ratio
    rb = complexity_ratio(pair_b).ratio
    rc = complexity_ratio(pair_c).ratio
    assert ra < rb < rc


def test_self_pair_ratio_is_exactly_one(pair_b, pair_c):
    selfs = [
        EnvironmentPair("selfB", pair_b.physical, pair_b.physical,
                        (-2.5, 0.0), NORTH),
        EnvironmentPair("selfC", pair_c.virtual, pair_c.virtual,
                        (0.0, -3.5), NORTH),
    ]
    for pair in selfs:
        assert complexity_ratio(pair).ratio == 1.0


def test_report_normalization_consistency(pair_c):
    r = complexity_ratio(pair_c)
    s_phys = math.sqrt(pair_c.physical.free_area)
    s_virt = math.sqrt(pair_c.virtual.free_area)
    assert r.c_physical_normalized == pytest.approx(r.c_physical / s_phys)
    assert r.c_virtual_normalized == pytest.approx(r.c_virtual / s_virt)
    assert r.ratio == pytest.approx(
        r.c_physical_normalized / r.c_virtual_normalized, rel=1e-12)
    assert r.grid_spacing == 0.5
    d = r.to_dict()
    assert d["ratio"] == r.ratio
    assert d["sample_counts"] == [336, 1312]


def test_square_complexity_near_continuum(pair_a):
    # continuous mean clearance of a 10 m empty square is 10/6
    fine = environment_complexity(pair_a.physical, spacing=0.01)
    assert fine == pytest.approx(10.0 / 6.0, rel=5e-3)
    coarse = environment_complexity(pair_a.physical, spacing=0.5)
    assert coarse == pytest.approx(fine, rel=0.05)


def test_scale_equivariance():
    big = Environment("big", Polygon([(-5, -5), (5, -5), (5, 5), (-5, 5)]))
    small = Environment("small", Polygon([(-2.5, -2.5), (2.5, -2.5),
                                          (2.5, 2.5), (-2.5, 2.5)]))
    c_big = environment_complexity(big, spacing=0.5)
    c_small = environment_complexity(small, spacing=0.25)
    assert c_small == pytest.approx(0.5 * c_big, rel=1e-12)


def test_grid_refinement_stability():
    for name in ("A", "B", "C"):
        pair = builtin_pair(name)
        for env in (pair.physical, pair.virtual):
            coarse = environment_complexity(env, spacing=0.5)
            fine = environment_complexity(env, spacing=0.1)
            assert abs(coarse - fine) / coarse <= 0.10, env.name


def test_spacing_validation(pair_a):
    with pytest.raises(ValueError, match="spacing"):
        environment_complexity(pair_a.physical, spacing=0.0)
    with pytest.raises(ValueError, match="spacing"):
        complexity_ratio(pair_a, spacing=-1.0)


def test_no_free_grid_points_errors():
    env = Environment("blocked", Polygon([(0, 0), (1, 0), (1, 1), (0, 1)]),
                      (Polygon([(0.2, 0.2), (0.8, 0.2),
                                (0.8, 0.8), (0.2, 0.8)]),))
    # the single 1.0-pitch cell center (0.5, 0.5) sits inside the obstacle
    with pytest.raises(ValueError, match="no free grid points"):
        environment_complexity(env, spacing=1.0)
