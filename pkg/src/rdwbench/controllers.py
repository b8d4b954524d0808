"""Steering controllers: ARC (alignment-based), S2C (steer-to-center), APF.

Each controller answers three per-frame questions: the gains to apply
while translating, the rotation gain while turning in place, and the
reset command when the physical user gets within the trigger distance
of an edge. Gain bounds are hard limits re-checked by the engine:

* translation gain in [0.86, 1.26],
* |curvature| <= 1/7.5 rad per meter walked (positive steers left),
* rotation gain in [0.67, 1.24].

Resets rotate the physical user to a chosen safe heading; the virtual
user sweeps a full turn in place meanwhile (so the maneuver is
imperceptible as an interruption, not as redirection).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum, IntEnum

from .alignment import SystemState, alignment_score, sample_state
from .environments import EnvironmentPair
from .geometry import _apf_force, _ray_scan

logger = logging.getLogger(__name__)

MIN_TRANSLATION_GAIN = 0.86
MAX_TRANSLATION_GAIN = 1.26
MIN_ROTATION_GAIN = 0.67
MAX_ROTATION_GAIN = 1.24
MAX_CURVATURE = 1.0 / 7.5  # rad per meter walked
GAIN_SMOOTHING = 0.125     # weight of the previous frame's gain
RESET_DIRECTIONS = 20
EQ_TOL = 1e-9
TWO_PI = 2.0 * math.pi

_S2C_TEMP_TARGET_BEARING = math.radians(160.0)
_S2C_RAMP_ANGLE = math.radians(45.0)


class ControllerKind(str, Enum):
    ARC = "arc"
    S2C = "s2c"
    APF = "apf"


class Phase(str, Enum):
    TRANSLATING = "translating"
    ROTATING = "rotating"


class TurnDirection(IntEnum):
    COUNTERCLOCKWISE = 1
    CLOCKWISE = -1


@dataclass(frozen=True)
class GainCommand:
    translation_gain: float = 1.0
    curvature: float = 0.0  # rad/m, positive = steer left
    rotation_gain: float = 1.0

    def __post_init__(self):
        if not (MIN_TRANSLATION_GAIN <= self.translation_gain <= MAX_TRANSLATION_GAIN):
            raise ValueError(f"translation gain {self.translation_gain} out of bounds")
        if abs(self.curvature) > MAX_CURVATURE + EQ_TOL:
            raise ValueError(f"curvature {self.curvature} out of bounds")
        if not (MIN_ROTATION_GAIN <= self.rotation_gain <= MAX_ROTATION_GAIN):
            raise ValueError(f"rotation gain {self.rotation_gain} out of bounds")


IDENTITY_GAINS = GainCommand()


@dataclass(frozen=True)
class ResetCommand:
    target_physical_heading: float
    turn_direction: TurnDirection
    virtual_turn_total: float = TWO_PI


def wrap_angle(a: float) -> float:
    """Wrap to [-pi, pi); exact identity for values already in range."""
    if -math.pi <= a < math.pi:
        return a
    a = math.fmod(a + math.pi, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    return a - math.pi


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def larger_arc(current_heading: float, target_heading: float) -> tuple[TurnDirection, float]:
    """Turn direction and sweep taking the LARGER of the two arcs to the target."""
    d = wrap_angle(target_heading - current_heading)
    if d == 0.0:
        return TurnDirection.COUNTERCLOCKWISE, TWO_PI
    direction = TurnDirection.CLOCKWISE if d > 0.0 else TurnDirection.COUNTERCLOCKWISE
    return direction, TWO_PI - abs(d)


def physical_sweep(current_heading: float, cmd: ResetCommand) -> float:
    """Physical arc length (rad, > 0) from the current heading to the target."""
    if cmd.turn_direction == TurnDirection.COUNTERCLOCKWISE:
        sweep = (cmd.target_physical_heading - current_heading) % TWO_PI
    else:
        sweep = (current_heading - cmd.target_physical_heading) % TWO_PI
    return TWO_PI if sweep < 1e-12 else sweep


# ---------------------------------------------------------------------------
# ARC gain rules (scalar cores shared by the ops and the trial controllers)


def _translation_gain(d_phys_fwd: float, d_virt_fwd: float) -> float:
    if d_virt_fwd < 1e-6:
        # cannot happen mid-trial (a reset fires first); diagnostic guard
        logger.warning("translation gain requested with d_virt=%.3g; returning max",
                       d_virt_fwd)
        return MAX_TRANSLATION_GAIN
    return _clamp(d_phys_fwd / d_virt_fwd, MIN_TRANSLATION_GAIN, MAX_TRANSLATION_GAIN)


def _curvature(mis_left: float, mis_right: float) -> float:
    # steer toward the side with more physical surplus; a non-positive
    # surplus on the chosen side means no useful steering direction
    if mis_left > mis_right:
        return max(0.0, min(1.0, mis_left)) * MAX_CURVATURE
    if mis_right > mis_left:
        return -max(0.0, min(1.0, mis_right)) * MAX_CURVATURE
    return 0.0


def _rotation_raw(prev_alignment: float, cur_alignment: float) -> float:
    if abs(prev_alignment - cur_alignment) <= EQ_TOL:
        return 1.0
    # alignment dropping = the turn is helping: amplify it
    return MAX_ROTATION_GAIN if prev_alignment > cur_alignment else MIN_ROTATION_GAIN


def _smooth_rotation(raw: float, previous_gain: float) -> float:
    g = GAIN_SMOOTHING * previous_gain + (1.0 - GAIN_SMOOTHING) * raw
    return _clamp(g, MIN_ROTATION_GAIN, MAX_ROTATION_GAIN)


def _pick_reset_direction(edges, px: float, py: float,
                          nx: float, ny: float, d_virt_fwd: float) -> float:
    """Best of 20 equally spaced absolute directions for an ARC reset.

    Constraint 1: direction points away from the obstacle (positive dot
    with the normal). Constraint 2 (preferred): physical ray distance
    >= the virtual forward distance, minimizing the surplus; otherwise
    the valid direction with the closest distance match. Ties keep the
    lowest direction index.
    """
    best_surplus = math.inf
    best_surplus_theta = None
    best_close = math.inf
    best_close_theta = None
    for i in range(RESET_DIRECTIONS):
        th = i * (TWO_PI / RESET_DIRECTIONS)
        dx, dy = math.cos(th), math.sin(th)
        # strict positivity with an epsilon: a direction at an exact right
        # angle to the normal (cos/sin noise ~1e-16) walks parallel to the
        # wall and immediately re-triggers
        if dx * nx + dy * ny <= 1e-12:
            continue
        diff = _ray_scan(edges, px, py, dx, dy) - d_virt_fwd
        if diff >= 0.0 and diff < best_surplus:
            best_surplus = diff
            best_surplus_theta = th
        if abs(diff) < best_close:
            best_close = abs(diff)
            best_close_theta = th
    if best_surplus_theta is not None:
        return best_surplus_theta
    if best_close_theta is not None:
        return best_close_theta
    return math.atan2(ny, nx)  # degenerate normal: face straight away


# ---------------------------------------------------------------------------
# stateless ops over full system states


def arc_translation_gain(state: SystemState, pair: EnvironmentPair) -> float:
    fp = sample_state(pair.physical, state.physical).forward
    fv = sample_state(pair.virtual, state.virtual).forward
    return _translation_gain(fp, fv)


def arc_curvature(state: SystemState, pair: EnvironmentPair) -> float:
    tp = sample_state(pair.physical, state.physical)
    tv = sample_state(pair.virtual, state.virtual)
    return _curvature(tp.left - tv.left, tp.right - tv.right)


def arc_rotation_gain(current: SystemState, previous: SystemState,
                      previous_gain: float, pair: EnvironmentPair) -> float:
    raw = _rotation_raw(alignment_score(pair, previous), alignment_score(pair, current))
    return _smooth_rotation(raw, previous_gain)


def arc_reset(state: SystemState, pair: EnvironmentPair,
              obstacle_normal: tuple[float, float]) -> ResetCommand:
    d_virt = sample_state(pair.virtual, state.virtual).forward
    px, py = state.physical.position
    theta = _pick_reset_direction(pair.physical.edge_array, px, py,
                                  obstacle_normal[0], obstacle_normal[1], d_virt)
    direction, _ = larger_arc(state.physical.heading, theta)
    return ResetCommand(theta, direction)


def _bbox_center(env) -> tuple[float, float]:
    x0, y0, x1, y1 = env.bbox
    return (x0 + x1) / 2.0, (y0 + y1) / 2.0


def _s2c_bearing_error(px: float, py: float, heading: float,
                       cx: float, cy: float) -> float | None:
    """Signed bearing error to the center; None when standing on it."""
    ex, ey = cx - px, cy - py
    if math.hypot(ex, ey) < 1e-9:
        return None
    return wrap_angle(math.atan2(ey, ex) - heading)


def _s2c_raw_curvature(beta: float | None) -> float:
    if beta is None:
        return 0.0
    if abs(beta) > _S2C_TEMP_TARGET_BEARING:
        # nearly behind: steer at a temporary target 90 deg off the center
        # bearing on the user's side instead of fighting the full reversal
        beta = beta - math.copysign(math.pi / 2.0, beta)
    return math.copysign(min(1.0, abs(beta) / _S2C_RAMP_ANGLE), beta) * MAX_CURVATURE


def s2c_step(state: SystemState, pair: EnvironmentPair, phase: Phase,
             previous: GainCommand | None = None, turn_sign: int = 0) -> GainCommand:
    """Steer-to-center step. ``turn_sign`` is the sign of the current
    virtual rotation (needed only while rotating)."""
    px, py = state.physical.position
    cx, cy = _bbox_center(pair.physical)
    beta = _s2c_bearing_error(px, py, state.physical.heading, cx, cy)
    if phase == Phase.TRANSLATING:
        raw = _s2c_raw_curvature(beta)
        prev = 0.0 if previous is None else previous.curvature
        c = _clamp(GAIN_SMOOTHING * prev + (1.0 - GAIN_SMOOTHING) * raw,
                   -MAX_CURVATURE, MAX_CURVATURE)
        return GainCommand(curvature=c)
    helps = beta is not None and turn_sign * beta > 0.0
    return GainCommand(rotation_gain=MAX_ROTATION_GAIN if helps else MIN_ROTATION_GAIN)


def apf_step(state: SystemState, pair: EnvironmentPair, phase: Phase,
             turn_sign: int = 0) -> GainCommand:
    """Potential-field step: full-strength curvature toward the repulsion sum."""
    px, py = state.physical.position
    fx, fy = _apf_force(pair.physical.edge_array, px, py)
    if fx * fx + fy * fy < 1e-24:
        err = None  # equilibrium: no preferred direction
    else:
        err = wrap_angle(math.atan2(fy, fx) - state.physical.heading)
    if phase == Phase.TRANSLATING:
        if err is None:
            return GainCommand()
        return GainCommand(curvature=MAX_CURVATURE if err >= 0.0 else -MAX_CURVATURE)
    helps = err is not None and turn_sign * err > 0.0
    return GainCommand(rotation_gain=MAX_ROTATION_GAIN if helps else MIN_ROTATION_GAIN)


def baseline_reset(state: SystemState, pair: EnvironmentPair, kind: ControllerKind,
                   obstacle_normal: tuple[float, float]) -> ResetCommand:
    """Reset-to-center for S2C/APF; APF falls back to its force direction
    when the center lies behind the obstacle being hit."""
    if kind == ControllerKind.ARC:
        raise ValueError("ARC uses arc_reset, not the baseline policy")
    px, py = state.physical.position
    nx, ny = obstacle_normal
    cx, cy = _bbox_center(pair.physical)
    dx, dy = cx - px, cy - py
    if math.hypot(dx, dy) < 1e-9:
        target = math.atan2(ny, nx)
    elif kind == ControllerKind.APF and dx * nx + dy * ny <= 1e-12:
        fx, fy = _apf_force(pair.physical.edge_array, px, py)
        if fx * fx + fy * fy < 1e-24:
            target = math.atan2(ny, nx)
        else:
            target = math.atan2(fy, fx)
    else:
        target = math.atan2(dy, dx)
    direction, _ = larger_arc(state.physical.heading, target)
    return ResetCommand(target, direction)


# ---------------------------------------------------------------------------
# per-trial stateful controllers driven by the simulation engine
#
# The engine hands these raw floats (poses and precomputed proximity
# triples) so the hot loop stays allocation-free; the methods mirror the
# ops above exactly.


class TrialController:
    kind: ControllerKind

    def __init__(self, pair: EnvironmentPair):
        self._pair = pair
        self._phys_edges = pair.physical.edge_array

    def translate_cmd(self, px, py, ph, fp, lp, rp, fv, lv, rv) -> tuple[float, float]:
        """(translation_gain, curvature) for a walking frame."""
        raise NotImplementedError

    def rotation_gain(self, turn_sign, prev_align, cur_align, px, py, ph) -> float:
        raise NotImplementedError

    def reset_cmd(self, px, py, ph, nx, ny, d_virt_fwd) -> ResetCommand:
        raise NotImplementedError


class ArcTrialController(TrialController):
    kind = ControllerKind.ARC

    def __init__(self, pair: EnvironmentPair):
        super().__init__(pair)
        self._prev_rotation_gain = 1.0

    def translate_cmd(self, px, py, ph, fp, lp, rp, fv, lv, rv):
        return _translation_gain(fp, fv), _curvature(lp - lv, rp - rv)

    def rotation_gain(self, turn_sign, prev_align, cur_align, px, py, ph):
        g = _smooth_rotation(_rotation_raw(prev_align, cur_align),
                             self._prev_rotation_gain)
        self._prev_rotation_gain = g
        return g

    def reset_cmd(self, px, py, ph, nx, ny, d_virt_fwd):
        theta = _pick_reset_direction(self._phys_edges, px, py, nx, ny, d_virt_fwd)
        direction, _ = larger_arc(ph, theta)
        return ResetCommand(theta, direction)


class _BaselineTrialController(TrialController):
    def __init__(self, pair: EnvironmentPair):
        super().__init__(pair)
        self._center = _bbox_center(pair.physical)

    def reset_cmd(self, px, py, ph, nx, ny, d_virt_fwd):
        from .alignment import UserState
        state = SystemState(UserState((px, py), ph), UserState((px, py), ph))
        # virtual half of the state is unused by the baseline policy
        return baseline_reset(state, self._pair, self.kind, (nx, ny))


class S2CTrialController(_BaselineTrialController):
    kind = ControllerKind.S2C

    def __init__(self, pair: EnvironmentPair):
        super().__init__(pair)
        self._prev_curvature = 0.0

    def translate_cmd(self, px, py, ph, fp, lp, rp, fv, lv, rv):
        cx, cy = self._center
        raw = _s2c_raw_curvature(_s2c_bearing_error(px, py, ph, cx, cy))
        c = _clamp(GAIN_SMOOTHING * self._prev_curvature + (1.0 - GAIN_SMOOTHING) * raw,
                   -MAX_CURVATURE, MAX_CURVATURE)
        self._prev_curvature = c
        return 1.0, c

    def rotation_gain(self, turn_sign, prev_align, cur_align, px, py, ph):
        cx, cy = self._center
        beta = _s2c_bearing_error(px, py, ph, cx, cy)
        helps = beta is not None and turn_sign * beta > 0.0
        return MAX_ROTATION_GAIN if helps else MIN_ROTATION_GAIN


class ApfTrialController(_BaselineTrialController):
    kind = ControllerKind.APF

    def translate_cmd(self, px, py, ph, fp, lp, rp, fv, lv, rv):
        fx, fy = _apf_force(self._phys_edges, px, py)
        if fx * fx + fy * fy < 1e-24:
            return 1.0, 0.0
        err = wrap_angle(math.atan2(fy, fx) - ph)
        return 1.0, (MAX_CURVATURE if err >= 0.0 else -MAX_CURVATURE)

    def rotation_gain(self, turn_sign, prev_align, cur_align, px, py, ph):
        fx, fy = _apf_force(self._phys_edges, px, py)
        if fx * fx + fy * fy < 1e-24:
            return MIN_ROTATION_GAIN
        err = wrap_angle(math.atan2(fy, fx) - ph)
        return MAX_ROTATION_GAIN if turn_sign * err > 0.0 else MIN_ROTATION_GAIN


_CONTROLLERS = {
    ControllerKind.ARC: ArcTrialController,
    ControllerKind.S2C: S2CTrialController,
    ControllerKind.APF: ApfTrialController,
}


def make_controller(kind: ControllerKind | str, pair: EnvironmentPair) -> TrialController:
    return _CONTROLLERS[ControllerKind(kind)](pair)
