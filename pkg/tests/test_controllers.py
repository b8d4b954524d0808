"""Steering controller gain rules, reset policies, angle helpers."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_free_poses
from rdwbench import (
    GainCommand,
    ControllerKind,
    MAX_CURVATURE,
    MAX_ROTATION_GAIN,
    MAX_TRANSLATION_GAIN,
    MIN_ROTATION_GAIN,
    MIN_TRANSLATION_GAIN,
    Phase,
    ResetCommand,
    SystemState,
    TurnDirection,
    UserState,
    apf_step,
    arc_curvature,
    arc_reset,
    arc_rotation_gain,
    arc_translation_gain,
    baseline_reset,
    make_controller,
    ray_distance,
    s2c_step,
    sample_state,
)
from rdwbench.controllers import (
    IDENTITY_GAINS,
    RESET_DIRECTIONS,
    TWO_PI,
    ArcTrialController,
    _curvature,
    _translation_gain,
    larger_arc,
    physical_sweep,
    wrap_angle,
)

NORTH = math.pi / 2


def _state(px, py, ph, vx, vy, vh):
    return SystemState(UserState((px, py), ph), UserState((vx, vy), vh))


# ---------------------------------------------------------------------------
# angle helpers


def test_wrap_angle_identity_for_in_range_values():
    for a in (-math.pi, -1.7, 0.0, 0.3, math.pi - 1e-12):
        assert wrap_angle(a) == a  # bitwise identity inside [-pi, pi)


def test_wrap_angle_wraps_out_of_range():
    assert wrap_angle(math.pi) == pytest.approx(-math.pi)
    assert wrap_angle(2 * math.pi) == pytest.approx(0.0, abs=1e-12)
    assert wrap_angle(-3 * math.pi / 2) == pytest.approx(math.pi / 2)


@settings(max_examples=300, deadline=None)
@given(st.floats(-50.0, 50.0), st.integers(-5, 5))
def test_wrap_angle_properties(a, k):
    w = wrap_angle(a)
    assert -math.pi <= w < math.pi
    assert wrap_angle(w) == w  # idempotent, bitwise
    shifted = wrap_angle(a + k * TWO_PI)
    assert abs(wrap_angle(shifted - w)) < 1e-9


def test_larger_arc_picks_the_long_way():
    # target 90 deg counterclockwise: the larger arc goes clockwise 270 deg
    direction, sweep = larger_arc(0.0, math.pi / 2)
    assert direction == TurnDirection.CLOCKWISE
    assert sweep == pytest.approx(3 * math.pi / 2)
    direction, sweep = larger_arc(0.0, -math.pi / 2)
    assert direction == TurnDirection.COUNTERCLOCKWISE
    assert sweep == pytest.approx(3 * math.pi / 2)
    direction, sweep = larger_arc(1.0, 1.0)
    assert direction == TurnDirection.COUNTERCLOCKWISE
    assert sweep == pytest.approx(TWO_PI)


@settings(max_examples=200, deadline=None)
@given(st.floats(-math.pi, math.pi - 1e-9), st.floats(-math.pi, math.pi - 1e-9))
def test_larger_arc_properties(cur, tgt):
    direction, sweep = larger_arc(cur, tgt)
    assert math.pi <= sweep <= TWO_PI + 1e-12
    short = abs(wrap_angle(tgt - cur))
    assert sweep + short == pytest.approx(TWO_PI, abs=1e-9)
    # physical_sweep must agree with the sweep larger_arc promised
    cmd = ResetCommand(tgt, direction)
    assert physical_sweep(cur, cmd) == pytest.approx(sweep, abs=1e-9)


# ---------------------------------------------------------------------------
# GainCommand bounds


def test_gain_command_accepts_extremes():
    GainCommand(MIN_TRANSLATION_GAIN, -MAX_CURVATURE, MIN_ROTATION_GAIN)
    GainCommand(MAX_TRANSLATION_GAIN, MAX_CURVATURE, MAX_ROTATION_GAIN)
    assert IDENTITY_GAINS == GainCommand(1.0, 0.0, 1.0)


@pytest.mark.parametrize("kwargs", [
    {"translation_gain": 1.27},
    {"translation_gain": 0.85},
    {"curvature": 0.14},
    {"curvature": -0.14},
    {"rotation_gain": 1.25},
    {"rotation_gain": 0.66},
])
def test_gain_command_rejects_out_of_bounds(kwargs):
    with pytest.raises(ValueError):
        GainCommand(**kwargs)


# ---------------------------------------------------------------------------
# translation gain


def test_translation_gain_ratio_and_clamps():
    assert _translation_gain(5.0, 4.0) == pytest.approx(1.25)
    assert _translation_gain(10.0, 4.0) == MAX_TRANSLATION_GAIN
    assert _translation_gain(1.0, 10.0) == MIN_TRANSLATION_GAIN
    assert _translation_gain(3.0, 3.0) == 1.0


def test_translation_gain_zero_forward_guard(caplog):
    import logging
    with caplog.at_level(logging.WARNING, logger="rdwbench.controllers"):
        assert _translation_gain(2.0, 0.0) == MAX_TRANSLATION_GAIN
    assert any("translation gain" in r.message for r in caplog.records)


def test_arc_translation_gain_from_states(pair_a):
    # physical sees 5 m ahead, virtual 4 m -> gain 5/4
    s = _state(0, 0, NORTH, 0, 1, NORTH)
    assert arc_translation_gain(s, pair_a) == pytest.approx(1.25)
    # ratio above the cap clamps: 5 / 0.8 -> 1.26
    s = _state(0, 0, NORTH, 0, 4.2, NORTH)
    assert arc_translation_gain(s, pair_a) == MAX_TRANSLATION_GAIN
    # and below: 0.8 / 5 -> 0.86
    s = _state(0, 4.2, NORTH, 0, 0, NORTH)
    assert arc_translation_gain(s, pair_a) == MIN_TRANSLATION_GAIN


# ---------------------------------------------------------------------------
# curvature


def test_curvature_core_fixtures():
    assert _curvature(2.0, 0.5) == pytest.approx(MAX_CURVATURE)      # saturated
    assert _curvature(0.5, 0.2) == pytest.approx(0.5 * MAX_CURVATURE)
    assert _curvature(0.7, 0.7) == 0.0                               # tie
    assert _curvature(-0.1, -0.5) == 0.0   # chosen side has no surplus
    assert _curvature(0.2, 0.9) == pytest.approx(-0.9 * MAX_CURVATURE)


@settings(max_examples=300, deadline=None)
@given(st.floats(-3, 3, allow_nan=False), st.floats(-3, 3, allow_nan=False))
def test_curvature_antisymmetric_and_bounded(a, b):
    c = _curvature(a, b)
    assert abs(c) <= MAX_CURVATURE
    assert _curvature(b, a) == pytest.approx(-c, abs=0.0)


def test_arc_curvature_from_states(pair_a):
    # physical (5,5,5) vs virtual (5,6,4): right side has the surplus
    s = _state(0, 0, NORTH, 1, 0, NORTH)
    assert arc_curvature(s, pair_a) == pytest.approx(-MAX_CURVATURE)
    # half-meter surplus scales proportionally
    s = _state(0, 0, NORTH, 0.5, 0, NORTH)
    assert arc_curvature(s, pair_a) == pytest.approx(-0.5 * MAX_CURVATURE)
    # mirrored virtual offset steers the other way
    s = _state(0, 0, NORTH, -0.5, 0, NORTH)
    assert arc_curvature(s, pair_a) == pytest.approx(0.5 * MAX_CURVATURE)


# ---------------------------------------------------------------------------
# rotation gain


def test_rotation_gain_fixtures(pair_a):
    # alignment in the A/A pair with a virtual x-offset is 2|x|
    at_15 = _state(0, 0, NORTH, 0.75, 0, NORTH)   # alignment 1.5
    at_20 = _state(0, 0, NORTH, 1.00, 0, NORTH)   # alignment 2.0
    # improving (2.0 -> 1.5): amplified, smoothing keeps it at the max
    assert arc_rotation_gain(at_15, at_20, 1.24, pair_a) == pytest.approx(1.24)
    # worsening (1.5 -> 2.0): 0.125 * 1.24 + 0.875 * 0.67
    assert arc_rotation_gain(at_20, at_15, 1.24, pair_a) == \
        pytest.approx(0.74125, abs=1e-12)
    # unchanged alignment: raw 1.0
    assert arc_rotation_gain(at_15, at_15, 1.0, pair_a) == pytest.approx(1.0)


def test_rotation_gain_equality_tolerance(pair_a):
    from rdwbench.controllers import _rotation_raw, _smooth_rotation
    assert _rotation_raw(1.0, 1.0 + 5e-10) == 1.0   # within 1e-9: equal
    assert _rotation_raw(1.0, 1.0 + 5e-9) == MIN_ROTATION_GAIN
    assert _rotation_raw(1.0 + 5e-9, 1.0) == MAX_ROTATION_GAIN
    # smoothing stays clamped even from out-of-range carryover
    assert _smooth_rotation(0.67, 0.67) == pytest.approx(0.67)
    assert MIN_ROTATION_GAIN <= _smooth_rotation(1.24, 0.67) <= MAX_ROTATION_GAIN


def test_arc_identity_at_perfect_alignment(pair_a):
    s = _state(0, 0, NORTH, 0, 0, NORTH)
    assert arc_translation_gain(s, pair_a) == 1.0
    assert arc_curvature(s, pair_a) == 0.0
    assert arc_rotation_gain(s, s, 1.0, pair_a) == 1.0


# ---------------------------------------------------------------------------
# ARC reset


def test_arc_reset_head_on_wall_candidates(pair_a):
    # facing the east wall head-on: normal (-1, 0); exactly 9 of the 20
    # spokes point away from the wall once right-angle noise is excluded
    px, py = 4.0, 0.0
    nx, ny = -1.0, 0.0
    valid = [i for i in range(RESET_DIRECTIONS)
             if math.cos(i * TWO_PI / RESET_DIRECTIONS) * nx
             + math.sin(i * TWO_PI / RESET_DIRECTIONS) * ny > 1e-12]
    assert len(valid) == 9
    s = _state(px, py, 0.0, 0, 0, NORTH)
    cmd = arc_reset(s, pair_a, (nx, ny))
    angles = [wrap_angle(i * TWO_PI / RESET_DIRECTIONS) for i in valid]
    assert any(abs(wrap_angle(cmd.target_physical_heading - a)) < 1e-12
               for a in angles)
    assert cmd.virtual_turn_total == pytest.approx(TWO_PI)


def test_arc_reset_two_tier_selection(pair_a, pair_c):
    """Exhaustive re-scan of the 20 spokes reproduces the chosen one."""
    rng = np.random.default_rng(5)
    for pair in (pair_a, pair_c):
        phys = random_free_poses(pair.physical, 40, rng)
        virt = random_free_poses(pair.virtual, 40, rng)
        for (px, py, ph), (vx, vy, vh) in zip(phys, virt):
            from rdwbench import nearest_obstacle_point
            d, (cx, cy) = nearest_obstacle_point(pair.physical, (px, py))
            if d < 1e-6:
                continue
            n = ((px - cx) / d, (py - cy) / d)
            s = _state(px, py, ph, vx, vy, vh)
            cmd = arc_reset(s, pair, n)
            d_virt = sample_state(pair.virtual, s.virtual).forward

            surplus_best, close_best = None, None
            for i in range(RESET_DIRECTIONS):
                th = i * TWO_PI / RESET_DIRECTIONS
                if math.cos(th) * n[0] + math.sin(th) * n[1] <= 1e-12:
                    continue
                diff = ray_distance(pair.physical, (px, py), th) - d_virt
                if diff >= 0 and (surplus_best is None or diff < surplus_best[0]):
                    surplus_best = (diff, th)
                if close_best is None or abs(diff) < close_best[0]:
                    close_best = (abs(diff), th)
            want = surplus_best[1] if surplus_best else close_best[1]
            assert abs(wrap_angle(cmd.target_physical_heading - want)) < 1e-9
            # turn direction takes the larger arc
            direction, _ = larger_arc(ph, cmd.target_physical_heading)
            assert cmd.turn_direction == direction


def test_arc_reset_degenerate_normal_faces_normal(pair_a):
    s = _state(0, 4.0, NORTH, 0, 0, NORTH)
    # a normal pointing straight down leaves 9 valid spokes; a zero-ish
    # normal (fails every dot test) falls back to the normal direction
    cmd = arc_reset(s, pair_a, (0.0, 0.0))
    assert cmd.target_physical_heading == pytest.approx(math.atan2(0.0, 0.0))


# ---------------------------------------------------------------------------
# S2C


def test_s2c_at_center_no_curvature(pair_a):
    s = _state(0, 0, NORTH, 0, 0, NORTH)
    cmd = s2c_step(s, pair_a, Phase.TRANSLATING)
    assert cmd.curvature == 0.0
    assert cmd.translation_gain == 1.0


def test_s2c_right_angle_bearing(pair_a):
    # at (2, 0) facing north the room center is 90 deg to the left
    s = _state(2, 0, NORTH, 0, 0, NORTH)
    cmd = s2c_step(s, pair_a, Phase.TRANSLATING)
    assert cmd.curvature == pytest.approx(0.875 * MAX_CURVATURE)
    assert cmd.rotation_gain == 1.0


def test_s2c_small_bearing_ramps_proportionally(pair_a):
    heading = math.pi - math.radians(10.0)   # 10 deg short of the center line
    s = _state(2, 0, heading, 0, 0, NORTH)
    cmd = s2c_step(s, pair_a, Phase.TRANSLATING)
    want = 0.875 * (10.0 / 45.0) * MAX_CURVATURE
    assert cmd.curvature == pytest.approx(want, rel=1e-9)


def test_s2c_smoothing_uses_previous_command(pair_a):
    s = _state(2, 0, NORTH, 0, 0, NORTH)
    prev = GainCommand(curvature=-MAX_CURVATURE)
    cmd = s2c_step(s, pair_a, Phase.TRANSLATING, previous=prev)
    want = 0.125 * -MAX_CURVATURE + 0.875 * MAX_CURVATURE
    assert cmd.curvature == pytest.approx(want)


def test_s2c_temporary_target_when_center_is_behind(pair_a):
    # center almost directly behind (beta = +170 deg): steer at a target
    # 90 deg off the center bearing instead of fighting the reversal
    heading = math.pi - math.radians(170.0)
    s = _state(2, 0, heading, 0, 0, NORTH)
    cmd = s2c_step(s, pair_a, Phase.TRANSLATING)
    assert cmd.curvature == pytest.approx(0.875 * MAX_CURVATURE)
    mirrored = _state(2, 0, -heading, 0, 0, NORTH)
    cmd2 = s2c_step(mirrored, pair_a, Phase.TRANSLATING)
    assert cmd2.curvature == pytest.approx(-0.875 * MAX_CURVATURE)


def test_s2c_rotating_gain(pair_a):
    s = _state(2, 0, NORTH, 0, 0, NORTH)   # center 90 deg to the left
    helps = s2c_step(s, pair_a, Phase.ROTATING, turn_sign=1)
    hurts = s2c_step(s, pair_a, Phase.ROTATING, turn_sign=-1)
    assert helps.rotation_gain == MAX_ROTATION_GAIN
    assert hurts.rotation_gain == MIN_ROTATION_GAIN
    assert helps.curvature == 0.0 and helps.translation_gain == 1.0
    centered = _state(0, 0, NORTH, 0, 0, NORTH)
    assert s2c_step(centered, pair_a, Phase.ROTATING,
                    turn_sign=1).rotation_gain == MIN_ROTATION_GAIN


# ---------------------------------------------------------------------------
# APF


def test_apf_equilibrium_at_square_center(pair_a):
    s = _state(0, 0, NORTH, 0, 0, NORTH)
    cmd = apf_step(s, pair_a, Phase.TRANSLATING)
    assert cmd == IDENTITY_GAINS
    assert apf_step(s, pair_a, Phase.ROTATING,
                    turn_sign=1).rotation_gain == MIN_ROTATION_GAIN


def test_apf_steers_away_from_near_wall(pair_a):
    # 1 m from the east wall, heading north: the repulsion sum points
    # west, which is a left turn -> maximum positive curvature
    s = _state(4, 0, NORTH, 0, 0, NORTH)
    cmd = apf_step(s, pair_a, Phase.TRANSLATING)
    assert cmd.curvature == pytest.approx(MAX_CURVATURE)
    flipped = _state(4, 0, -NORTH, 0, 0, NORTH)
    assert apf_step(flipped, pair_a,
                    Phase.TRANSLATING).curvature == pytest.approx(-MAX_CURVATURE)


def test_apf_translating_curvature_is_all_or_nothing(pair_b, pair_c):
    rng = np.random.default_rng(17)
    for pair in (pair_b, pair_c):
        for x, y, th in random_free_poses(pair.physical, 100, rng):
            s = _state(x, y, th, *pair.virtual_start_position,
                       pair.virtual_start_heading)
            c = apf_step(s, pair, Phase.TRANSLATING).curvature
            assert c == 0.0 or abs(c) == pytest.approx(MAX_CURVATURE, abs=0.0)


def test_apf_rotating_gain_tracks_force_direction(pair_a):
    s = _state(4, 0, NORTH, 0, 0, NORTH)  # force points west: left turn helps
    assert apf_step(s, pair_a, Phase.ROTATING,
                    turn_sign=1).rotation_gain == MAX_ROTATION_GAIN
    assert apf_step(s, pair_a, Phase.ROTATING,
                    turn_sign=-1).rotation_gain == MIN_ROTATION_GAIN


# ---------------------------------------------------------------------------
# baseline resets


def test_baseline_reset_targets_center(pair_a):
    s = _state(4, 0, 0.0, 0, 0, NORTH)
    cmd = baseline_reset(s, pair_a, ControllerKind.S2C, (-1.0, 0.0))
    assert cmd.target_physical_heading == pytest.approx(math.pi)
    assert cmd.virtual_turn_total == pytest.approx(TWO_PI)
    direction, _ = larger_arc(0.0, cmd.target_physical_heading)
    assert cmd.turn_direction == direction


def test_baseline_reset_at_center_faces_normal(pair_a):
    s = _state(0, 0, 0.0, 0, 0, NORTH)
    cmd = baseline_reset(s, pair_a, ControllerKind.S2C, (0.6, 0.8))
    assert cmd.target_physical_heading == pytest.approx(math.atan2(0.8, 0.6))


def test_baseline_reset_apf_falls_back_to_force(pair_c):
    from rdwbench.geometry import _apf_force
    # south of the central block: the center bearing points INTO the
    # obstacle (fails the dot test with normal (0,-1)), so APF uses its
    # force direction while S2C still heads for the center
    s = _state(0.0, -1.8, NORTH, 0, -3.5, NORTH)
    apf_cmd = baseline_reset(s, pair_c, ControllerKind.APF, (0.0, -1.0))
    fx, fy = _apf_force(pair_c.physical.edge_array, 0.0, -1.8)
    assert apf_cmd.target_physical_heading == pytest.approx(math.atan2(fy, fx))
    s2c_cmd = baseline_reset(s, pair_c, ControllerKind.S2C, (0.0, -1.0))
    assert s2c_cmd.target_physical_heading == pytest.approx(NORTH)


def test_baseline_reset_rejects_arc(pair_a):
    s = _state(4, 0, 0.0, 0, 0, NORTH)
    with pytest.raises(ValueError):
        baseline_reset(s, pair_a, ControllerKind.ARC, (-1.0, 0.0))


# ---------------------------------------------------------------------------
# per-trial controllers mirror the ops


def test_make_controller_kinds(pair_a):
    for kind in ("arc", "s2c", "apf"):
        ctrl = make_controller(kind, pair_a)
        assert ctrl.kind == ControllerKind(kind)
    assert isinstance(make_controller(ControllerKind.ARC, pair_a),
                      ArcTrialController)
    with pytest.raises((KeyError, ValueError)):
        make_controller("nope", pair_a)


def test_trial_controllers_match_ops(pair_c):
    rng = np.random.default_rng(23)
    arc = make_controller("arc", pair_c)
    s2c = make_controller("s2c", pair_c)
    apf = make_controller("apf", pair_c)
    prev_s2c = None
    phys = random_free_poses(pair_c.physical, 60, rng)
    virt = random_free_poses(pair_c.virtual, 60, rng)
    for (px, py, ph), (vx, vy, vh) in zip(phys, virt):
        s = _state(px, py, ph, vx, vy, vh)
        tp = sample_state(pair_c.physical, s.physical)
        tv = sample_state(pair_c.virtual, s.virtual)
        args = (px, py, ph, tp.forward, tp.left, tp.right,
                tv.forward, tv.left, tv.right)
        g_t, curv = arc.translate_cmd(*args)
        assert g_t == arc_translation_gain(s, pair_c)
        assert curv == arc_curvature(s, pair_c)

        g_t, curv = s2c.translate_cmd(*args)
        cmd = s2c_step(s, pair_c, Phase.TRANSLATING, previous=prev_s2c)
        assert (g_t, curv) == (cmd.translation_gain, cmd.curvature)
        prev_s2c = cmd

        g_t, curv = apf.translate_cmd(*args)
        cmd = apf_step(s, pair_c, Phase.TRANSLATING)
        assert (g_t, curv) == (cmd.translation_gain, cmd.curvature)


def test_arc_trial_controller_smooths_rotation(pair_a):
    ctrl = make_controller("arc", pair_a)
    # worsening from a fresh controller (previous gain 1.0)
    g1 = ctrl.rotation_gain(1, 1.5, 2.0, 0.0, 0.0, NORTH)
    assert g1 == pytest.approx(0.125 * 1.0 + 0.875 * 0.67)
    # and the carried state feeds the next smoothing step
    g2 = ctrl.rotation_gain(1, 1.5, 2.0, 0.0, 0.0, NORTH)
    assert g2 == pytest.approx(0.125 * g1 + 0.875 * 0.67)
