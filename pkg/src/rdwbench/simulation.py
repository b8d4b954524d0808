"""Discrete-time trial engine.

A trial walks a virtual user through a fixed waypoint list at 20 Hz
while a controller redirects the physical user. Per frame the engine is
in exactly one of three modes:

* reset turn: the physical user sweeps toward the reset target while
  the virtual user spins a full circle in place,
* rotating: the virtual heading is more than 0.5 degrees off the
  bearing to the next waypoint, so the user turns in place (physical
  turn = rotation gain x virtual turn),
* translating: the virtual user advances along the bearing at walk
  speed; the physical user advances that distance times the
  translation gain along its own heading, which then bends by
  curvature x distance.

Controller inputs (proximity triples) are sampled from the state at the
END of the previous frame; the state logged for a frame is the state
after that frame's motion, alongside the gains applied during it.
A reset fires when the post-move physical clearance drops below the
trigger distance, and is recorded at that (still translating) frame.
Physical moves that would leave less clearance than the user radius are
blocked outright while the virtual user keeps advancing, so a cornered
physical user stalls into repeated resets rather than penetrating a
wall.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np
from numba import njit

from .controllers import (
    TWO_PI,
    ControllerKind,
    TrialController,
    make_controller,
    physical_sweep,
    wrap_angle,
)
from .environments import _MASK64, EnvironmentPair
from .geometry import (
    _in_free_space,
    _nearest_on_edges,
    _proximity_triples,
    _segment_min_clearance,
    clearance,
    point_in_free_space,
)

_PATH_STREAM = 0  # SeedSequence stream tag; physical-start draws use 1

CSV_COLUMNS = (
    "time_s",
    "phys_x",
    "phys_y",
    "phys_heading_rad",
    "virt_x",
    "virt_y",
    "virt_heading_rad",
    "g_t",
    "curvature_rad_per_m",
    "g_r",
    "alignment_m",
    "resetting",
)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.05                    # s per frame
    walk_speed: float = 1.0             # virtual m/s while translating
    turn_speed: float = math.pi / 2.0   # virtual rad/s while rotating
    user_radius: float = 0.5            # m
    reset_buffer: float = 0.2           # trigger = radius + buffer
    heading_tolerance: float = math.radians(0.5)
    arrival_tolerance: float = 1e-3     # m
    leg_min: float = 2.0                # waypoint leg length bounds, m
    leg_max: float = 6.0
    min_path_clearance: float = 0.7     # m, along every leg
    max_frames_per_waypoint: int = 10_000
    rng_seed: Optional[int] = None      # carried in serialized configs;
                                        # runners pass per-path seeds explicitly

    @property
    def trigger_distance(self) -> float:
        return self.user_radius + self.reset_buffer

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(**d)


class PathGenerationError(RuntimeError):
    pass


class TrialStalledError(RuntimeError):
    pass


def generate_path(env, start, seed: int, n_waypoints: int,
                  config: SimConfig | None = None,
                  max_draws: int = 10_000,
                  start_heading: float = 0.0) -> np.ndarray:
    """Random waypoint chain in ``env`` starting from ``start``.

    Each leg draws a uniform length in [leg_min, leg_max], then a
    relative turn uniform in (-pi, pi] off the previous accepted leg's
    direction (the first leg turns off ``start_heading``). Both are
    re-drawn until the whole leg keeps min_path_clearance from every
    edge. Returns an (n_waypoints, 2) array; the start point is not
    included. Deterministic in ``seed``.
    """
    cfg = config or SimConfig()
    rng = np.random.default_rng([int(seed) & _MASK64, _PATH_STREAM])
    edges = env.edge_array
    pts = np.empty((n_waypoints, 2))
    x, y = float(start[0]), float(start[1])
    base = float(start_heading)
    for k in range(n_waypoints):
        for _ in range(max_draws):
            leg = rng.uniform(cfg.leg_min, cfg.leg_max)
            ang = base + rng.uniform(-math.pi, math.pi)
            cx = x + leg * math.cos(ang)
            cy = y + leg * math.sin(ang)
            if _in_free_space(env.boundary_x, env.boundary_y,
                              env.obstacle_x, env.obstacle_y,
                              env.obstacle_offsets, edges, cx, cy) != 0:
                continue
            if _segment_min_clearance(edges, x, y, cx, cy) < cfg.min_path_clearance:
                continue
            pts[k, 0] = cx
            pts[k, 1] = cy
            x, y = cx, cy
            base = ang
            break
        else:
            raise PathGenerationError(
                f"path_generation_stuck: no clear leg from ({x:.3f}, {y:.3f}) "
                f"after {max_draws} draws (waypoint {k} of {n_waypoints})")
    return pts


@dataclass(eq=False)
class PathSpec:
    index: int
    seed: int
    waypoints: np.ndarray  # (n, 2)


@dataclass(eq=False)
class TrialRecord:
    """Columnar per-frame log of one trial (columns in CSV_COLUMNS order)."""

    controller: str
    frames: np.ndarray            # (n, 12) float64
    reset_frames: np.ndarray      # int64 indices of reset trigger frames
    completed: Optional[bool]     # None when replayed from CSV
    waypoints: Optional[np.ndarray] = None

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_resets(self) -> int:
        return int(self.reset_frames.shape[0])

    def column(self, name: str) -> np.ndarray:
        return self.frames[:, CSV_COLUMNS.index(name)]

    @property
    def time_s(self): return self.frames[:, 0]
    @property
    def phys_x(self): return self.frames[:, 1]
    @property
    def phys_y(self): return self.frames[:, 2]
    @property
    def phys_heading_rad(self): return self.frames[:, 3]
    @property
    def virt_x(self): return self.frames[:, 4]
    @property
    def virt_y(self): return self.frames[:, 5]
    @property
    def virt_heading_rad(self): return self.frames[:, 6]
    @property
    def g_t(self): return self.frames[:, 7]
    @property
    def curvature_rad_per_m(self): return self.frames[:, 8]
    @property
    def g_r(self): return self.frames[:, 9]
    @property
    def alignment_m(self): return self.frames[:, 10]
    @property
    def resetting(self) -> np.ndarray:
        return self.frames[:, 11].astype(np.int64)


def write_trial_csv(record: TrialRecord, path) -> None:
    fmt = ["%.6f"] * 11 + ["%d"]
    np.savetxt(path, record.frames, fmt=fmt, delimiter=",",
               header=",".join(CSV_COLUMNS), comments="")


def read_trial_csv(path, controller: str = "") -> TrialRecord:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(CSV_COLUMNS):
        raise ValueError(f"{path}: expected {len(CSV_COLUMNS)} columns, "
                         f"got {data.shape[1]}")
    flags = data[:, 11] > 0.5
    # a trigger frame is the (non-resetting) frame right before a turn run
    triggers = np.flatnonzero(~flags[:-1] & flags[1:]).astype(np.int64)
    return TrialRecord(controller=controller, frames=data,
                       reset_frames=triggers, completed=None)


@njit(cache=True)
def _sense(p_edges, px, py, ph, v_edges, vx, vy, vh):
    fp, lp, rp, fv, lv, rv = _proximity_triples(p_edges, px, py, ph,
                                                v_edges, vx, vy, vh)
    d, cx, cy = _nearest_on_edges(p_edges, px, py)
    return fp, lp, rp, fv, lv, rv, d, cx, cy


class _FrameLog:
    __slots__ = ("buf", "n")

    def __init__(self, capacity: int = 4096):
        self.buf = np.empty((capacity, len(CSV_COLUMNS)))
        self.n = 0

    def append(self, row) -> None:
        if self.n == self.buf.shape[0]:
            grown = np.empty((self.buf.shape[0] * 2, self.buf.shape[1]))
            grown[: self.n] = self.buf
            self.buf = grown
        self.buf[self.n] = row
        self.n += 1

    def trimmed(self) -> np.ndarray:
        return self.buf[: self.n].copy()


def run_trial(pair: EnvironmentPair,
              controller: ControllerKind | str | TrialController,
              waypoints,
              physical_start,
              config: SimConfig | None = None) -> TrialRecord:
    """Simulate one trial and return its frame log.

    ``physical_start`` is (x, y, heading). The virtual user starts at
    the pair's virtual start pose and visits ``waypoints`` in order.
    """
    cfg = config or SimConfig()
    ctrl = (controller if isinstance(controller, TrialController)
            else make_controller(controller, pair))
    wpts = np.asarray(waypoints, dtype=float).reshape(-1, 2)
    for k in range(wpts.shape[0]):
        if not point_in_free_space(pair.virtual, (wpts[k, 0], wpts[k, 1])):
            raise ValueError(f"waypoint {k} is not in virtual free space")

    px, py, ph = float(physical_start[0]), float(physical_start[1]), \
        float(physical_start[2])
    if clearance(pair.physical, (px, py)) < cfg.trigger_distance:
        raise ValueError("physical start is inside the reset trigger distance")
    vx, vy = pair.virtual_start_position
    vh = pair.virtual_start_heading

    p_edges = pair.physical.edge_array
    v_edges = pair.virtual.edge_array

    dt = cfg.dt
    step_v = cfg.walk_speed * dt
    turn_step = cfg.turn_speed * dt
    trigger = cfg.trigger_distance
    radius = cfg.user_radius
    budget = max(1, wpts.shape[0]) * cfg.max_frames_per_waypoint

    log = _FrameLog()
    reset_frames: list[int] = []

    fp, lp, rp, fv, lv, rv, near_d, _, _ = _sense(
        p_edges, px, py, ph, v_edges, vx, vy, vh)
    align_cur = abs(fp - fv) + abs(lp - lv) + abs(rp - rv)
    align_prev = align_cur
    log.append((0.0, px, py, ph, vx, vy, vh, 1.0, 0.0, 1.0, align_cur, 0.0))

    w = 0
    n_wp = wpts.shape[0]
    frame = 0

    # active reset bookkeeping
    reset_left = 0          # turn frames remaining
    reset_dir = 0.0
    reset_target = 0.0
    reset_vh_restore = 0.0
    reset_vstep = 0.0       # virtual rad per turn frame

    while frame < budget:
        if reset_left == 0 and w >= n_wp:
            break
        frame += 1
        g_t, curv, g_r, flag = 1.0, 0.0, 1.0, 0.0
        check_reset = False

        if reset_left > 0:
            reset_left -= 1
            if reset_left == 0:
                ph = wrap_angle(reset_target)
                vh = reset_vh_restore
            else:
                ph = wrap_angle(ph + reset_dir * turn_step)
                vh = wrap_angle(vh + reset_dir * reset_vstep)
            flag = 1.0
        else:
            wx, wy = wpts[w, 0], wpts[w, 1]
            bearing = math.atan2(wy - vy, wx - vx)
            err = wrap_angle(bearing - vh)
            if abs(err) > cfg.heading_tolerance:
                turn_sign = 1.0 if err > 0.0 else -1.0
                g_r = ctrl.rotation_gain(turn_sign, align_prev, align_cur,
                                         px, py, ph)
                if abs(err) <= turn_step:
                    # same-expression update: at zero heading offset and
                    # unit gain the physical lands exactly on `bearing`,
                    # keeping the aligned fixed point bitwise stable
                    ph = (wrap_angle((ph - vh) + bearing) if g_r == 1.0
                          else wrap_angle(ph + g_r * err))
                    vh = bearing
                else:
                    dth = turn_sign * turn_step
                    vh = wrap_angle(vh + dth)
                    ph = wrap_angle(ph + g_r * dth)
            else:
                g_t, curv = ctrl.translate_cmd(px, py, ph,
                                               fp, lp, rp, fv, lv, rv)
                if not (0.86 - 1e-12 <= g_t <= 1.26 + 1e-12
                        and abs(curv) <= 1.0 / 7.5 + 1e-9):
                    raise RuntimeError(
                        f"{ctrl.kind.value} emitted out-of-bounds gains "
                        f"g_t={g_t} curvature={curv}")
                dist = math.hypot(wx - vx, wy - vy)
                sv = min(step_v, dist)
                dxv = sv * math.cos(bearing)
                dyv = sv * math.sin(bearing)
                vx += dxv
                vy += dyv
                # arrival is a declaration, not a teleport: snapping the
                # virtual user would break physical/virtual symmetry
                if math.hypot(wx - vx, wy - vy) < cfg.arrival_tolerance:
                    w += 1
                # physical displacement = virtual displacement rotated by
                # the heading offset and scaled by g_t; at zero offset the
                # rotation is exact (cos 0 = 1, sin 0 = 0), so identical
                # poses in identical rooms stay identical bitwise
                offset = wrap_angle(ph - vh)
                co, so = math.cos(offset), math.sin(offset)
                cand_x = px + g_t * (co * dxv - so * dyv)
                cand_y = py + g_t * (so * dxv + co * dyv)
                d_cand, _, _ = _nearest_on_edges(p_edges, cand_x, cand_y)
                if d_cand >= radius:
                    px, py = cand_x, cand_y
                ph = wrap_angle(ph + curv * sv)
                check_reset = True

        fp, lp, rp, fv, lv, rv, near_d, near_x, near_y = _sense(
            p_edges, px, py, ph, v_edges, vx, vy, vh)
        align_prev = align_cur
        align_cur = abs(fp - fv) + abs(lp - lv) + abs(rp - rv)
        log.append((frame * dt, px, py, ph, vx, vy, vh,
                    g_t, curv, g_r, align_cur, flag))

        if check_reset and near_d <= trigger:
            reset_frames.append(log.n - 1)
            nx = (px - near_x) / near_d
            ny = (py - near_y) / near_d
            cmd = ctrl.reset_cmd(px, py, ph, nx, ny, fv)
            sweep = physical_sweep(ph, cmd)
            reset_left = max(1, int(math.ceil(sweep / turn_step - 1e-9)))
            reset_dir = float(cmd.turn_direction)
            reset_target = cmd.target_physical_heading
            reset_vh_restore = vh
            reset_vstep = turn_step * cmd.virtual_turn_total / sweep

    if not (w >= n_wp and reset_left == 0):
        raise TrialStalledError(
            f"trial_stalled: {ctrl.kind.value} exhausted {budget} frames "
            f"at waypoint {w} of {n_wp}")
    return TrialRecord(controller=ctrl.kind.value, frames=log.trimmed(),
                       reset_frames=np.asarray(reset_frames, dtype=np.int64),
                       completed=True, waypoints=wpts)
