"""Shared test utilities: independent geometry oracles and state samplers.

The oracles here deliberately re-derive results with different code
paths (vectorized numpy, normal-projection form) than the library's
compiled kernels, so agreement is evidence rather than tautology.
"""
from __future__ import annotations

import math

import numpy as np

from rdwbench import clearance, point_in_free_space


def oracle_ray_distance(env, p, theta: float) -> float:
    """Brute-force all-edges ray scan, normal-projection formulation.

    For each edge a->b with normal n = perp(b - a): the ray p + t*d hits
    the edge's supporting line at t = n . (a - p) / n . d; the hit
    counts when t >= 0 and its projection onto the edge direction lies
    within the segment (inclusive, 1e-9 parameter tolerance).
    """
    e = np.asarray(env.edge_array, dtype=float)
    ax, ay = e[:, 0], e[:, 1]
    ux, uy = e[:, 2] - ax, e[:, 3] - ay           # edge direction
    nx, ny = -uy, ux                              # edge normal
    dx, dy = math.cos(theta), math.sin(theta)
    den = nx * dx + ny * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (nx * (ax - p[0]) + ny * (ay - p[1])) / den
        qx = p[0] + t * dx - ax
        qy = p[1] + t * dy - ay
        s = (qx * ux + qy * uy) / (ux * ux + uy * uy)
    ok = (den != 0.0) & (t >= 0.0) & (s >= -1e-9) & (s <= 1.0 + 1e-9)
    return float(t[ok].min()) if ok.any() else math.inf


def oracle_clearance(env, p) -> float:
    """Min point-to-segment distance over all edges, vectorized numpy."""
    e = np.asarray(env.edge_array, dtype=float)
    ax, ay = e[:, 0], e[:, 1]
    ux, uy = e[:, 2] - ax, e[:, 3] - ay
    L2 = ux * ux + uy * uy
    t = np.clip(((p[0] - ax) * ux + (p[1] - ay) * uy) / L2, 0.0, 1.0)
    return float(np.min(np.hypot(p[0] - (ax + t * ux), p[1] - (ay + t * uy))))


def random_free_poses(env, n: int, rng: np.random.Generator,
                      min_clearance: float = 0.0) -> np.ndarray:
    """(n, 3) array of (x, y, heading) with positions in free space."""
    x0, y0, x1, y1 = env.bbox
    out = np.empty((n, 3))
    k = 0
    while k < n:
        xs = rng.uniform(x0, x1, size=n)
        ys = rng.uniform(y0, y1, size=n)
        for x, y in zip(xs, ys):
            if k >= n:
                break
            if not point_in_free_space(env, (x, y)):
                continue
            if min_clearance > 0.0 and clearance(env, (x, y)) < min_clearance:
                continue
            out[k, 0] = x
            out[k, 1] = y
            out[k, 2] = rng.uniform(-math.pi, math.pi)
            k += 1
    return out


def walking_mask(record) -> np.ndarray:
    """Frames (index 1..n-1) where the virtual user actually moved,
    excluding reset-turn frames; mirrors the metrics definition."""
    seg = np.hypot(np.diff(record.virt_x), np.diff(record.virt_y))
    return (record.resetting[1:] == 0) & (seg > 1e-12)


def read_tree(root):
    """{relative path: bytes} for every file under root (sorted keys)."""
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}
