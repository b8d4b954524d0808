"""2D polygon primitives: ray casting, clearance, segment clearance, containment.

Conventions used throughout the package:

* angles are radians, counterclockwise from +x ("north" = +y = pi/2);
* the outer boundary walls count as obstacles for every distance query;
* a ray passing exactly through a vertex hits both incident edges (the
  edge parameter is accepted inclusively), so corner leak-through cannot
  occur;
* distances are 64-bit floats, intersection parameters use a 1e-9
  tolerance.

The hot kernels operate on a packed ``(E, 4)`` float64 edge array
(``ax, ay, bx, by`` per row) and are compiled with numba; environments
precompute and cache that array (see :mod:`rdwbench.environments`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from numba import njit

if TYPE_CHECKING:  # pragma: no cover
    from .environments import Environment

PARAM_TOL = 1e-9
# points closer than this to an edge are treated as lying on it
ON_EDGE_TOL = 1e-12


class FreeSpaceError(ValueError):
    """A query point violated a free-space precondition.

    ``check`` identifies which containment test failed:
    ``outside_boundary``, ``inside_obstacle:<i>`` or ``on_edge``.
    """

    def __init__(self, check: str, point: tuple[float, float]):
        self.check = check
        self.point = point
        super().__init__(f"point {point} not in free space: {check}")


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True)
def _ray_scan(edges, px, py, dx, dy):
    """Smallest ray parameter t >= 0 hitting any edge; inf when none."""
    best = np.inf
    for k in range(edges.shape[0]):
        ax = edges[k, 0]
        ay = edges[k, 1]
        ex = edges[k, 2] - ax
        ey = edges[k, 3] - ay
        den = dx * ey - dy * ex
        if den == 0.0:
            # parallel (collinear overlap is caught via the adjacent,
            # endpoint-inclusive edges of the closed polygon)
            continue
        rx = ax - px
        ry = ay - py
        t = (rx * ey - ry * ex) / den
        s = (rx * dy - ry * dx) / den
        if t >= 0.0 and -1e-9 <= s <= 1.0 + 1e-9 and t < best:
            best = t
    return best


@njit(cache=True)
def _nearest_on_edges(edges, px, py):
    """(distance, closest_x, closest_y) to the nearest point of any edge."""
    best = np.inf
    bx = 0.0
    by = 0.0
    for k in range(edges.shape[0]):
        ax = edges[k, 0]
        ay = edges[k, 1]
        vx = edges[k, 2] - ax
        vy = edges[k, 3] - ay
        L2 = vx * vx + vy * vy
        t = 0.0
        if L2 > 0.0:
            t = ((px - ax) * vx + (py - ay) * vy) / L2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        cx = ax + t * vx
        cy = ay + t * vy
        d = math.hypot(px - cx, py - cy)
        if d < best:
            best = d
            bx = cx
            by = cy
    return best, bx, by


@njit(cache=True)
def _pt_seg_dist(px, py, ax, ay, bx, by):
    vx = bx - ax
    vy = by - ay
    L2 = vx * vx + vy * vy
    t = 0.0
    if L2 > 0.0:
        t = ((px - ax) * vx + (py - ay) * vy) / L2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    return math.hypot(px - ax - t * vx, py - ay - t * vy)


@njit(cache=True)
def _segment_min_clearance(edges, ax, ay, bx, by):
    """Min distance from segment ab to any edge; 0 on intersection."""
    best = np.inf
    d1x = bx - ax
    d1y = by - ay
    for k in range(edges.shape[0]):
        qx = edges[k, 0]
        qy = edges[k, 1]
        d2x = edges[k, 2] - qx
        d2y = edges[k, 3] - qy
        den = d1x * d2y - d1y * d2x
        if den != 0.0:
            t = ((qx - ax) * d2y - (qy - ay) * d2x) / den
            s = ((qx - ax) * d1y - (qy - ay) * d1x) / den
            if 0.0 <= t <= 1.0 and 0.0 <= s <= 1.0:
                return 0.0
        d = _pt_seg_dist(ax, ay, qx, qy, edges[k, 2], edges[k, 3])
        if d < best:
            best = d
        d = _pt_seg_dist(bx, by, qx, qy, edges[k, 2], edges[k, 3])
        if d < best:
            best = d
        d = _pt_seg_dist(qx, qy, ax, ay, bx, by)
        if d < best:
            best = d
        d = _pt_seg_dist(edges[k, 2], edges[k, 3], ax, ay, bx, by)
        if d < best:
            best = d
    return best


@njit(cache=True)
def _poly_contains(xs, ys, px, py):
    """Even-odd containment; behavior on the boundary is unspecified."""
    inside = False
    n = xs.shape[0]
    j = n - 1
    for i in range(n):
        if (ys[i] > py) != (ys[j] > py):
            xint = xs[i] + (py - ys[i]) * (xs[j] - xs[i]) / (ys[j] - ys[i])
            if px < xint:
                inside = not inside
        j = i
    return inside


@njit(cache=True)
def _in_free_space(bnd_x, bnd_y, obs_x, obs_y, obs_off, edges, px, py):
    """Strictly inside the boundary, strictly outside obstacles, off edges.

    Returns 0 free, 1 outside boundary, 2+i inside obstacle i, -1 on edge.
    """
    d, _, _ = _nearest_on_edges(edges, px, py)
    if d < ON_EDGE_TOL:
        return -1
    if not _poly_contains(bnd_x, bnd_y, px, py):
        return 1
    for i in range(obs_off.shape[0] - 1):
        if _poly_contains(obs_x[obs_off[i]:obs_off[i + 1]],
                          obs_y[obs_off[i]:obs_off[i + 1]], px, py):
            return 2 + i
    return 0


@njit(cache=True)
def _proximity_triples(p_edges, px, py, ph, v_edges, vx, vy, vh):
    """Forward/left/right ray distances in both worlds, one call."""
    fp = _ray_scan(p_edges, px, py, math.cos(ph), math.sin(ph))
    lp = _ray_scan(p_edges, px, py, math.cos(ph + math.pi / 2), math.sin(ph + math.pi / 2))
    rp = _ray_scan(p_edges, px, py, math.cos(ph - math.pi / 2), math.sin(ph - math.pi / 2))
    fv = _ray_scan(v_edges, vx, vy, math.cos(vh), math.sin(vh))
    lv = _ray_scan(v_edges, vx, vy, math.cos(vh + math.pi / 2), math.sin(vh + math.pi / 2))
    rv = _ray_scan(v_edges, vx, vy, math.cos(vh - math.pi / 2), math.sin(vh - math.pi / 2))
    return fp, lp, rp, fv, lv, rv


@njit(cache=True)
def _apf_force(edges, px, py):
    """Per-edge repulsion sum  F = sum_e w_e / ||w_e||^2  (w from closest point)."""
    fx = 0.0
    fy = 0.0
    for k in range(edges.shape[0]):
        ax = edges[k, 0]
        ay = edges[k, 1]
        vx = edges[k, 2] - ax
        vy = edges[k, 3] - ay
        L2 = vx * vx + vy * vy
        t = 0.0
        if L2 > 0.0:
            t = ((px - ax) * vx + (py - ay) * vy) / L2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        wx = px - (ax + t * vx)
        wy = py - (ay + t * vy)
        d2 = wx * wx + wy * wy
        if d2 > 0.0:
            fx += wx / d2
            fy += wy / d2
    return fx, fy


@njit(cache=True)
def _grid_clearance_sum(bnd_x, bnd_y, obs_x, obs_y, obs_off, edges,
                        x0, y0, nx, ny, spacing):
    """Row-major sum of clearance over free cell centers; (total, count)."""
    total = 0.0
    count = 0
    for j in range(ny):
        py = y0 + (j + 0.5) * spacing
        for i in range(nx):
            px = x0 + (i + 0.5) * spacing
            if _in_free_space(bnd_x, bnd_y, obs_x, obs_y, obs_off, edges, px, py) == 0:
                d, _, _ = _nearest_on_edges(edges, px, py)
                total += d
                count += 1
    return total, count


# ---------------------------------------------------------------------------
# public types


def _as_point(p) -> tuple[float, float]:
    x, y = p
    return float(x), float(y)


@dataclass(frozen=True)
class Polygon:
    """Closed simple polygon given by its vertex ring (no repeated first vertex)."""

    vertices: tuple[tuple[float, float], ...]

    def __init__(self, vertices):
        object.__setattr__(self, "vertices", tuple(_as_point(v) for v in vertices))
        self._validate()

    def _validate(self) -> None:
        v = self.vertices
        n = len(v)
        if n < 3:
            raise ValueError(f"degenerate polygon: {n} vertices (need >= 3)")
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            if math.hypot(b[0] - a[0], b[1] - a[1]) < ON_EDGE_TOL:
                raise ValueError(f"degenerate polygon: vertices {i} and {(i + 1) % n} coincide")
        # simplicity: non-adjacent edges must not intersect; adjacent edges
        # must not fold back onto each other (collinear spikes)
        edges = [(v[i], v[(i + 1) % n]) for i in range(n)]
        for i in range(n):
            (a, b) = edges[i]
            abx, aby = b[0] - a[0], b[1] - a[1]
            for j in range(i + 1, n):
                adjacent = (j == i + 1) or (i == 0 and j == n - 1)
                (c, d) = edges[j]
                cdx, cdy = d[0] - c[0], d[1] - c[1]
                if adjacent:
                    cross = abx * cdy - aby * cdx
                    dot = abx * cdx + aby * cdy
                    if abs(cross) < ON_EDGE_TOL and dot < 0.0:
                        raise ValueError("non-simple polygon: adjacent edges fold back")
                    continue
                if _segments_cross(a, b, c, d):
                    raise ValueError(f"non-simple polygon: edges {i} and {j} intersect")

    @cached_property
    def vertex_array(self) -> np.ndarray:
        arr = np.asarray(self.vertices, dtype=np.float64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def edge_array(self) -> np.ndarray:
        v = self.vertex_array
        arr = np.empty((len(v), 4), dtype=np.float64)
        arr[:, 0:2] = v
        arr[:, 2:4] = np.roll(v, -1, axis=0)
        arr.setflags(write=False)
        return arr

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        v = self.vertex_array
        return (float(v[:, 0].min()), float(v[:, 1].min()),
                float(v[:, 0].max()), float(v[:, 1].max()))

    @cached_property
    def area(self) -> float:
        v = self.vertex_array
        x, y = v[:, 0], v[:, 1]
        return abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))) / 2.0

    def contains(self, p) -> bool:
        x, y = _as_point(p)
        v = self.vertex_array
        return bool(_poly_contains(np.ascontiguousarray(v[:, 0]),
                                   np.ascontiguousarray(v[:, 1]), x, y))


def _segments_cross(a, b, c, d) -> bool:
    """Closed-segment intersection test (shared endpoints count as crossing)."""
    d1x, d1y = b[0] - a[0], b[1] - a[1]
    d2x, d2y = d[0] - c[0], d[1] - c[1]
    den = d1x * d2y - d1y * d2x
    if den == 0.0:
        # parallel: overlap iff collinear and projections overlap
        if abs((c[0] - a[0]) * d1y - (c[1] - a[1]) * d1x) > ON_EDGE_TOL:
            return False
        dots = sorted(((p[0] - a[0]) * d1x + (p[1] - a[1]) * d1y) for p in (c, d))
        L2 = d1x * d1x + d1y * d1y
        return dots[1] >= -ON_EDGE_TOL and dots[0] <= L2 + ON_EDGE_TOL
    t = ((c[0] - a[0]) * d2y - (c[1] - a[1]) * d2x) / den
    s = ((c[0] - a[0]) * d1y - (c[1] - a[1]) * d1x) / den
    return -PARAM_TOL <= t <= 1.0 + PARAM_TOL and -PARAM_TOL <= s <= 1.0 + PARAM_TOL


@dataclass(frozen=True)
class Ray:
    """Origin plus unit direction; build from an angle with :meth:`from_angle`."""

    origin: tuple[float, float]
    direction: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "origin", _as_point(self.origin))
        object.__setattr__(self, "direction", _as_point(self.direction))
        dx, dy = self.direction
        if abs(math.hypot(dx, dy) - 1.0) > PARAM_TOL:
            raise ValueError(f"ray direction {self.direction} is not unit length")

    @classmethod
    def from_angle(cls, origin, theta: float) -> "Ray":
        return cls(_as_point(origin), (math.cos(theta), math.sin(theta)))

    @property
    def angle(self) -> float:
        return math.atan2(self.direction[1], self.direction[0])


# ---------------------------------------------------------------------------
# environment-level queries


def _require_free(env: "Environment", p: tuple[float, float]) -> None:
    code = _in_free_space(env.boundary_x, env.boundary_y, env.obstacle_x,
                          env.obstacle_y, env.obstacle_offsets, env.edge_array,
                          p[0], p[1])
    if code == 0:
        return
    if code == -1:
        raise FreeSpaceError("on_edge", p)
    if code == 1:
        raise FreeSpaceError("outside_boundary", p)
    raise FreeSpaceError(f"inside_obstacle:{code - 2}", p)


def ray_distance(env: "Environment", p, theta: float) -> float:
    """Distance from free-space point ``p`` along angle ``theta`` to the first edge."""
    p = _as_point(p)
    _require_free(env, p)
    return float(_ray_scan(env.edge_array, p[0], p[1], math.cos(theta), math.sin(theta)))


def clearance(env: "Environment", p) -> float:
    """Distance from free-space point ``p`` to the nearest edge (walls included)."""
    p = _as_point(p)
    _require_free(env, p)
    return float(_nearest_on_edges(env.edge_array, p[0], p[1])[0])


def nearest_obstacle_point(env: "Environment", p) -> tuple[float, tuple[float, float]]:
    """(clearance, closest edge point); basis for reset obstacle normals."""
    p = _as_point(p)
    _require_free(env, p)
    d, cx, cy = _nearest_on_edges(env.edge_array, p[0], p[1])
    return float(d), (float(cx), float(cy))


def segment_clearance(env: "Environment", a, b) -> float:
    """Min clearance along segment ab; 0 if it crosses any edge."""
    a = _as_point(a)
    b = _as_point(b)
    _require_free(env, a)
    _require_free(env, b)
    return float(_segment_min_clearance(env.edge_array, a[0], a[1], b[0], b[1]))


def point_in_free_space(env: "Environment", p) -> bool:
    """True iff strictly inside the boundary and strictly outside every obstacle."""
    p = _as_point(p)
    return _in_free_space(env.boundary_x, env.boundary_y, env.obstacle_x,
                          env.obstacle_y, env.obstacle_offsets, env.edge_array,
                          p[0], p[1]) == 0
