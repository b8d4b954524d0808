"""User states, proximity sampling and the alignment score.

The alignment score of a physical/virtual state pair is the L1 distance
between their proximity triples: ray distances ahead, to the left
(+90 deg) and to the right (-90 deg) of the user in each world. A score
of 0 means the local surroundings match exactly in those directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import geometry
from .environments import Environment, EnvironmentPair

EQ_TOL = 1e-9


@dataclass(frozen=True)
class UserState:
    """Pose in one world: position (m) and heading (rad, ccw from +x)."""

    position: tuple[float, float]
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "position", geometry._as_point(self.position))
        object.__setattr__(self, "heading", float(self.heading))


@dataclass(frozen=True)
class ProximityTriple:
    forward: float
    left: float
    right: float

    def __post_init__(self):
        for v in (self.forward, self.left, self.right):
            if not (v >= 0.0 and math.isfinite(v)):
                raise ValueError(f"proximity distances must be finite and >= 0, got {v}")

    def distance(self, other: "ProximityTriple") -> float:
        return (abs(self.forward - other.forward)
                + abs(self.left - other.left)
                + abs(self.right - other.right))


@dataclass(frozen=True)
class SystemState:
    physical: UserState
    virtual: UserState


def sample_state(env: Environment, u: UserState) -> ProximityTriple:
    """Ray distances at heading, heading+90 deg, heading-90 deg."""
    x, y = u.position
    geometry._require_free(env, u.position)
    h = u.heading
    edges = env.edge_array
    return ProximityTriple(
        forward=float(geometry._ray_scan(edges, x, y, math.cos(h), math.sin(h))),
        left=float(geometry._ray_scan(edges, x, y,
                                      math.cos(h + math.pi / 2), math.sin(h + math.pi / 2))),
        right=float(geometry._ray_scan(edges, x, y,
                                       math.cos(h - math.pi / 2), math.sin(h - math.pi / 2))),
    )


def alignment_score(pair: EnvironmentPair, s: SystemState) -> float:
    """Sum of |physical - virtual| over the two proximity triples; >= 0."""
    return sample_state(pair.physical, s.physical).distance(
        sample_state(pair.virtual, s.virtual))


def proximity_sum(env: Environment, p, k: int = 3, base_angle: float = 0.0) -> float:
    """Sum of ray distances over k equally spaced directions from ``p``.

    Directions are absolute: base_angle + 2*pi*i/k. Exposed for
    experimentation; the controller path uses the heading-relative
    triple above.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    p = geometry._as_point(p)
    geometry._require_free(env, p)
    edges = env.edge_array
    total = 0.0
    for i in range(k):
        th = base_angle + 2.0 * math.pi * i / k
        total += geometry._ray_scan(edges, p[0], p[1], math.cos(th), math.sin(th))
    return float(total)


def proximity_distance(pair: EnvironmentPair, p_phys, p_virt,
                       k: int = 3, base_angle: float = 0.0) -> float:
    """General-k alignment distance: sum_i |d_phys(theta_i) - d_virt(theta_i)|.

    The same absolute direction set is used in both worlds.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    p_phys = geometry._as_point(p_phys)
    p_virt = geometry._as_point(p_virt)
    geometry._require_free(pair.physical, p_phys)
    geometry._require_free(pair.virtual, p_virt)
    pe, ve = pair.physical.edge_array, pair.virtual.edge_array
    total = 0.0
    for i in range(k):
        th = base_angle + 2.0 * math.pi * i / k
        dx, dy = math.cos(th), math.sin(th)
        total += abs(geometry._ray_scan(pe, p_phys[0], p_phys[1], dx, dy)
                     - geometry._ray_scan(ve, p_virt[0], p_virt[1], dx, dy))
    return float(total)
