"""Environment complexity and the complexity ratio of a pair.

``environment_complexity`` is the mean clearance (distance to the
nearest wall or obstacle edge, meters) over the free cell centers of an
axis-aligned 0.5 m lattice anchored at the boundary bounding-box
minimum — the same lattice the heat maps use. Cell centers that fall
inside obstacles, outside the boundary, or exactly on an edge are
excluded.

Raw mean clearance grows with room size, so the ratio of a pair is
computed from scale-normalized complexities c / sqrt(free area), which
makes it dimensionless and comparable across rooms of different size:
an empty pair of any two sizes that are similar shapes scores near 1,
and larger values mean the physical world is proportionally more open
than the virtual one (harder steering). The report carries both the raw
and the normalized values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .environments import Environment, EnvironmentPair
from .geometry import _grid_clearance_sum

DEFAULT_SPACING = 0.5


@dataclass(frozen=True)
class ComplexityReport:
    c_physical: float            # raw mean clearance, m
    c_virtual: float             # raw mean clearance, m
    c_physical_normalized: float  # c / sqrt(free area), dimensionless
    c_virtual_normalized: float
    ratio: float                  # c_physical_normalized / c_virtual_normalized
    grid_spacing: float
    sample_counts: tuple[int, int]  # free cell centers (physical, virtual)

    def to_dict(self) -> dict:
        return {
            "c_physical": self.c_physical,
            "c_virtual": self.c_virtual,
            "c_physical_normalized": self.c_physical_normalized,
            "c_virtual_normalized": self.c_virtual_normalized,
            "ratio": self.ratio,
            "grid_spacing": self.grid_spacing,
            "sample_counts": list(self.sample_counts),
        }


def _grid_stats(env: Environment, spacing: float) -> tuple[float, int]:
    x0, y0, x1, y1 = env.bbox
    nx = max(1, int(math.ceil((x1 - x0) / spacing - 1e-9)))
    ny = max(1, int(math.ceil((y1 - y0) / spacing - 1e-9)))
    total, count = _grid_clearance_sum(
        env.boundary_x, env.boundary_y, env.obstacle_x, env.obstacle_y,
        env.obstacle_offsets, env.edge_array, x0, y0, nx, ny, spacing)
    return float(total), int(count)


def environment_complexity(env: Environment, spacing: float = DEFAULT_SPACING) -> float:
    """Mean clearance (m) over free grid cell centers."""
    if spacing <= 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    total, count = _grid_stats(env, spacing)
    if count == 0:
        raise ValueError(f"no free grid points in {env.name} at spacing {spacing}")
    return total / count


def complexity_ratio(pair: EnvironmentPair, spacing: float = DEFAULT_SPACING) -> ComplexityReport:
    """Complexity report for a pair; identical worlds give ratio exactly 1."""
    if spacing <= 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    t_phys, n_phys = _grid_stats(pair.physical, spacing)
    t_virt, n_virt = _grid_stats(pair.virtual, spacing)
    if n_phys == 0 or n_virt == 0:
        which = pair.physical.name if n_phys == 0 else pair.virtual.name
        raise ValueError(f"no free grid points in {which} at spacing {spacing}")
    c_phys = t_phys / n_phys
    c_virt = t_virt / n_virt
    s_phys = math.sqrt(pair.physical.free_area)
    s_virt = math.sqrt(pair.virtual.free_area)
    np_, nv_ = c_phys / s_phys, c_virt / s_virt
    # formulated so a self-pair divides a float by itself -> exactly 1.0
    ratio = (c_phys * s_virt) / (c_virt * s_phys)
    return ComplexityReport(c_physical=c_phys, c_virtual=c_virt,
                            c_physical_normalized=np_, c_virtual_normalized=nv_,
                            ratio=ratio, grid_spacing=spacing,
                            sample_counts=(n_phys, n_virt))
