"""Environment model, builtin benchmark pairs, JSON load/dump, start placement.

An :class:`Environment` is one world (physical or virtual): a boundary
polygon plus disjoint obstacle polygons. An :class:`EnvironmentPair`
couples the two worlds with the virtual start pose and the physical
start policy (a fixed point, or rejection-sampled random placement).

Obstacle vertices may lie ON the boundary (one builtin obstacle shares a
boundary wall) but never strictly outside it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Any

import numpy as np

from . import geometry
from .geometry import Polygon, _segments_cross

START_CLEARANCE = 0.7  # user radius + collision buffer; starts must clear it
_MASK64 = (1 << 64) - 1
_START_STREAM = 1  # SeedSequence stream tag for physical-start draws


class PairValidationError(ValueError):
    """Environment/pair constraint violation with a machine-readable code.

    ``code`` is one of: schema_violation, degenerate_polygon,
    non_simple_polygon, obstacle_outside_boundary, obstacle_overlap,
    start_outside, start_too_close. ``path`` points at the offending
    element, e.g. ``physical.obstacles[2]``.
    """

    def __init__(self, code: str, path: str, detail: str = ""):
        self.code = code
        self.path = path
        msg = f"{code} at {path}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


def _on_segment(p, a, b, tol=1e-9) -> bool:
    return geometry._pt_seg_dist(p[0], p[1], a[0], a[1], b[0], b[1]) <= tol


@dataclass(frozen=True, eq=False)
class Environment:
    name: str
    boundary: Polygon
    obstacles: tuple[Polygon, ...]

    def __init__(self, name: str, boundary: Polygon, obstacles=()):
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "obstacles", tuple(obstacles))
        self._validate()

    def _validate(self) -> None:
        bnd = self.boundary
        bnd_edges = [(bnd.vertices[i], bnd.vertices[(i + 1) % len(bnd.vertices)])
                     for i in range(len(bnd.vertices))]
        for i, ob in enumerate(self.obstacles):
            where = f"{self.name}.obstacles[{i}]"
            for v in ob.vertices:
                on_bnd = any(_on_segment(v, a, b) for a, b in bnd_edges)
                if not on_bnd and not bnd.contains(v):
                    raise PairValidationError("obstacle_outside_boundary", where,
                                              f"vertex {v} outside boundary")
            # vertices inside-or-on is not enough for concave boundaries:
            # obstacle edges must not properly cross a boundary edge
            for k in range(len(ob.vertices)):
                a = ob.vertices[k]
                b = ob.vertices[(k + 1) % len(ob.vertices)]
                for c, d in bnd_edges:
                    if _proper_crossing(a, b, c, d):
                        raise PairValidationError("obstacle_outside_boundary", where,
                                                  f"edge {k} crosses the boundary")
        for i in range(len(self.obstacles)):
            for j in range(i + 1, len(self.obstacles)):
                if _polygons_overlap(self.obstacles[i], self.obstacles[j]):
                    raise PairValidationError(
                        "obstacle_overlap", f"{self.name}.obstacles[{i}]",
                        f"overlaps obstacles[{j}]")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Environment):
            return NotImplemented
        return (self.name == other.name
                and self.boundary.vertices == other.boundary.vertices
                and tuple(o.vertices for o in self.obstacles)
                == tuple(o.vertices for o in other.obstacles))

    def __hash__(self):
        return hash((self.name, self.boundary.vertices,
                     tuple(o.vertices for o in self.obstacles)))

    # -- packed arrays consumed by the geometry kernels --

    @cached_property
    def edge_array(self) -> np.ndarray:
        parts = [self.boundary.edge_array] + [o.edge_array for o in self.obstacles]
        arr = np.ascontiguousarray(np.concatenate(parts, axis=0))
        arr.setflags(write=False)
        return arr

    @cached_property
    def boundary_x(self) -> np.ndarray:
        return np.ascontiguousarray(self.boundary.vertex_array[:, 0])

    @cached_property
    def boundary_y(self) -> np.ndarray:
        return np.ascontiguousarray(self.boundary.vertex_array[:, 1])

    @cached_property
    def obstacle_x(self) -> np.ndarray:
        if not self.obstacles:
            return np.empty(0, dtype=np.float64)
        return np.concatenate([np.ascontiguousarray(o.vertex_array[:, 0])
                               for o in self.obstacles])

    @cached_property
    def obstacle_y(self) -> np.ndarray:
        if not self.obstacles:
            return np.empty(0, dtype=np.float64)
        return np.concatenate([np.ascontiguousarray(o.vertex_array[:, 1])
                               for o in self.obstacles])

    @cached_property
    def obstacle_offsets(self) -> np.ndarray:
        off = np.zeros(len(self.obstacles) + 1, dtype=np.int64)
        for i, o in enumerate(self.obstacles):
            off[i + 1] = off[i] + len(o.vertices)
        return off

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        return self.boundary.bbox

    @cached_property
    def free_area(self) -> float:
        return self.boundary.area - sum(o.area for o in self.obstacles)


def _proper_crossing(a, b, c, d) -> bool:
    """Transversal interior-to-interior crossing (touching does not count)."""
    d1x, d1y = b[0] - a[0], b[1] - a[1]
    d2x, d2y = d[0] - c[0], d[1] - c[1]
    den = d1x * d2y - d1y * d2x
    if den == 0.0:
        return False
    t = ((c[0] - a[0]) * d2y - (c[1] - a[1]) * d2x) / den
    s = ((c[0] - a[0]) * d1y - (c[1] - a[1]) * d1x) / den
    eps = 1e-9
    return eps < t < 1.0 - eps and eps < s < 1.0 - eps


def _polygons_overlap(p: Polygon, q: Polygon) -> bool:
    """Interior overlap: any proper edge crossing or full containment."""
    pv, qv = p.vertices, q.vertices
    for i in range(len(pv)):
        a, b = pv[i], pv[(i + 1) % len(pv)]
        for j in range(len(qv)):
            c, d = qv[j], qv[(j + 1) % len(qv)]
            if _proper_crossing(a, b, c, d):
                return True
    return any(q.contains(v) for v in pv) or any(p.contains(v) for v in qv)


@dataclass(frozen=True, eq=False)
class EnvironmentPair:
    """Physical/virtual world pair plus start configuration.

    ``physical_start`` is either the string ``"random"`` (rejection-sample
    a free position with clearance >= 0.7 m, heading matching the virtual
    start) or a fixed ``(x, y)`` point.
    """

    name: str
    physical: Environment
    virtual: Environment
    virtual_start_position: tuple[float, float]
    virtual_start_heading: float
    physical_start: Any  # "random" | (x, y)

    def __init__(self, name, physical, virtual, virtual_start_position,
                 virtual_start_heading, physical_start="random"):
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "physical", physical)
        object.__setattr__(self, "virtual", virtual)
        object.__setattr__(self, "virtual_start_position",
                           geometry._as_point(virtual_start_position))
        object.__setattr__(self, "virtual_start_heading", float(virtual_start_heading))
        if physical_start != "random":
            physical_start = geometry._as_point(physical_start)
        object.__setattr__(self, "physical_start", physical_start)
        self._validate()

    def _validate(self) -> None:
        self._check_start(self.virtual, self.virtual_start_position, "virtual_start")
        if self.physical_start != "random":
            self._check_start(self.physical, self.physical_start, "physical_start")

    @staticmethod
    def _check_start(env: Environment, p, path: str) -> None:
        if not geometry.point_in_free_space(env, p):
            raise PairValidationError("start_outside", path, f"{p} not in free space")
        if geometry.clearance(env, p) < START_CLEARANCE:
            raise PairValidationError("start_too_close", path,
                                      f"clearance {geometry.clearance(env, p):.3f} < {START_CLEARANCE}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, EnvironmentPair):
            return NotImplemented
        return (self.name == other.name
                and self.physical == other.physical
                and self.virtual == other.virtual
                and self.virtual_start_position == other.virtual_start_position
                # headings survive a degrees round-trip only to ~1 ulp
                and abs(self.virtual_start_heading - other.virtual_start_heading) < 1e-12
                and self.physical_start == other.physical_start)

    def with_fixed_start(self, position=None) -> "EnvironmentPair":
        """Pair with the physical start pinned (default: the virtual start point)."""
        pos = self.virtual_start_position if position is None else position
        return EnvironmentPair(self.name, self.physical, self.virtual,
                               self.virtual_start_position, self.virtual_start_heading,
                               physical_start=pos)


def draw_physical_start(pair: EnvironmentPair, seed: int,
                        max_draws: int = 100_000) -> tuple[float, float, float]:
    """(x, y, heading) for one trial; deterministic in ``seed``.

    All controllers replaying the same path share this draw because it is
    keyed on the path seed alone.
    """
    heading = pair.virtual_start_heading
    if pair.physical_start != "random":
        x, y = pair.physical_start
        return x, y, heading
    env = pair.physical
    x0, y0, x1, y1 = env.bbox
    rng = np.random.default_rng([seed & _MASK64, _START_STREAM])
    for _ in range(max_draws):
        x = rng.uniform(x0, x1)
        y = rng.uniform(y0, y1)
        if not geometry.point_in_free_space(env, (x, y)):
            continue
        if geometry._nearest_on_edges(env.edge_array, x, y)[0] >= START_CLEARANCE:
            return float(x), float(y), heading
    raise PairValidationError("start_too_close", f"{pair.name}.physical_start",
                              f"no free start found in {max_draws} draws")


# ---------------------------------------------------------------------------
# builtin benchmark pairs

NORTH = math.pi / 2

_A_SQUARE = [(-5, -5), (5, -5), (5, 5), (-5, 5)]

_B_PHYS_BOUNDARY = [(-6, -6), (6, -6), (6, 6), (-6, 6)]
_B_CORRIDOR_OBSTACLES = [
    [(-4, -4), (-1, -4), (-1, -1), (-4, -1)],
    [(1, -4), (4, -4), (4, -1), (1, -1)],
    [(1, 1), (4, 1), (4, 4), (1, 4)],
    [(-4, 1), (-1, 1), (-1, 4), (-4, 4)],
]
_B_VIRT_BOUNDARY = [(-11, -6), (6, -6), (6, 6), (-11, 6)]
_B_VIRT_OBSTACLES = _B_CORRIDOR_OBSTACLES + [
    [(-9, 1), (-6, 1), (-6, 4), (-9, 4)],
    [(-9, -4), (-6, -4), (-6, -1), (-9, -1)],
]

_C_PHYS_OBSTACLES = [
    [(-4.5, -4.5), (-2.5, -4.5), (-2.5, -2.5), (-4.5, -2.5)],
    [(-2, -1), (2, -1), (2, 1), (-2, 1)],
    [(-2, 4), (2, 4), (2, 5), (-2, 5)],
]
_C_VIRT_BOUNDARY = [(10, -10), (10, 10), (-10, 10), (-10, -10)]
_C_VIRT_OBSTACLES = [
    [(-4.5, -4.5), (-2.5, -4.5), (-3.5, -2.5)],
    [(0, 2), (2, 1), (1, -2), (-1, -2), (-2, 1)],
    [(-2, 4), (2, 4), (2, 5), (-2, 5)],
    [(-8.5, 8.5), (-8.5, 2.5), (-6.5, 2.5), (-7, 7), (-2.5, 6.5), (-2.5, 8.5)],
    [(-8, -1), (-8, -2), (-7, -2), (-7, -1)],
    [(-7, -3), (-7, -4), (-6, -4), (-6, -3)],
    [(-9, -5), (-9, -7), (-8, -7), (-8, -5)],
    [(-6, -9), (-3, -7), (-3, -6), (-7, -8)],
    [(3, -4), (3, -8), (7, -8), (7, -4)],
    [(5, 9), (4, 8), (8, 4), (8, 8)],
]


def _env(name, boundary, obstacles=()):
    return Environment(name, Polygon(boundary), tuple(Polygon(o) for o in obstacles))


def builtin_pair(which: str) -> EnvironmentPair:
    """Benchmark pair A (empty square), B (corridor grid) or C (cluttered)."""
    key = str(which).strip().upper()
    if key == "A":
        return EnvironmentPair(
            "A", _env("A-physical", _A_SQUARE), _env("A-virtual", _A_SQUARE),
            (0.0, 0.0), NORTH)
    if key == "B":
        return EnvironmentPair(
            "B", _env("B-physical", _B_PHYS_BOUNDARY, _B_CORRIDOR_OBSTACLES),
            _env("B-virtual", _B_VIRT_BOUNDARY, _B_VIRT_OBSTACLES),
            (-2.5, 0.0), NORTH)
    if key == "C":
        return EnvironmentPair(
            "C", _env("C-physical", _A_SQUARE, _C_PHYS_OBSTACLES),
            _env("C-virtual", _C_VIRT_BOUNDARY, _C_VIRT_OBSTACLES),
            (0.0, -3.5), NORTH)
    raise ValueError(f"unknown builtin pair {which!r} (expected A, B or C)")


BUILTIN_PAIRS = ("A", "B", "C")


# ---------------------------------------------------------------------------
# JSON serialization


def _polygon_from_json(obj, path: str) -> Polygon:
    if (not isinstance(obj, list) or
            not all(isinstance(v, list) and len(v) == 2
                    and all(isinstance(c, (int, float)) for c in v) for v in obj)):
        raise PairValidationError("schema_violation", path, "expected [[x,y],...]")
    try:
        return Polygon(obj)
    except ValueError as exc:
        code = "non_simple_polygon" if "non-simple" in str(exc) else "degenerate_polygon"
        raise PairValidationError(code, path, str(exc)) from exc


def _env_from_json(obj, name: str, path: str) -> Environment:
    if not isinstance(obj, dict) or "boundary" not in obj:
        raise PairValidationError("schema_violation", path, "expected {boundary, obstacles}")
    boundary = _polygon_from_json(obj["boundary"], f"{path}.boundary")
    obstacles = []
    for i, ob in enumerate(obj.get("obstacles", [])):
        obstacles.append(_polygon_from_json(ob, f"{path}.obstacles[{i}]"))
    return Environment(name, boundary, tuple(obstacles))


def load_pair(document: str) -> EnvironmentPair:
    """Parse and validate an environment-pair JSON document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise PairValidationError("schema_violation", "$", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise PairValidationError("schema_violation", "$", "expected an object")
    for key in ("name", "physical", "virtual", "virtual_start"):
        if key not in doc:
            raise PairValidationError("schema_violation", f"$.{key}", "missing")
    name = doc["name"]
    physical = _env_from_json(doc["physical"], f"{name}-physical", "physical")
    virtual = _env_from_json(doc["virtual"], f"{name}-virtual", "virtual")
    vs = doc["virtual_start"]
    if (not isinstance(vs, dict) or "position" not in vs or "heading_deg" not in vs
            or not isinstance(vs["position"], list) or len(vs["position"]) != 2):
        raise PairValidationError("schema_violation", "virtual_start",
                                  "expected {position:[x,y], heading_deg:n}")
    start = doc.get("physical_start", "random")
    if start != "random":
        if not isinstance(start, dict) or "position" not in start:
            raise PairValidationError("schema_violation", "physical_start",
                                      'expected "random" or {position:[x,y]}')
        start = tuple(start["position"])
    return EnvironmentPair(name, physical, virtual, tuple(vs["position"]),
                           math.radians(float(vs["heading_deg"])), start)


def pair_to_json(pair: EnvironmentPair) -> str:
    """Serialize a pair; round-trips through :func:`load_pair` to an equal pair."""

    def env_obj(env: Environment):
        return {"boundary": [list(v) for v in env.boundary.vertices],
                "obstacles": [[list(v) for v in o.vertices] for o in env.obstacles]}

    doc = {
        "name": pair.name,
        "physical": env_obj(pair.physical),
        "virtual": env_obj(pair.virtual),
        "virtual_start": {"position": list(pair.virtual_start_position),
                          "heading_deg": math.degrees(pair.virtual_start_heading)},
        "physical_start": ("random" if pair.physical_start == "random"
                           else {"position": list(pair.physical_start)}),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def resolve_pair(ref: str) -> EnvironmentPair:
    """Builtin id (A/B/C) or a path to a pair JSON file."""
    if str(ref).strip().upper() in BUILTIN_PAIRS:
        return builtin_pair(ref)
    with open(ref, "r", encoding="utf-8") as fh:
        return load_pair(fh.read())
