"""Per-trial metrics and spatial summaries, replayable from frame logs.

Everything here is computed from a TrialRecord's frame table alone, so
metrics recomputed from a written CSV match the live run. Reset turn
frames (resetting flag = 1) are excluded from alignment and redirection
statistics; walking frames are recognized by the virtual position
actually having moved.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .simulation import TrialRecord

logger = logging.getLogger(__name__)

DEFAULT_HEATMAP_CELL = 0.5
CURVATURE_BIN_EDGES = np.arange(0.0, 8.0 + 1e-9, 0.5)  # deg/s, 16 bins


@dataclass(frozen=True)
class TrialMetrics:
    controller: str
    n_resets: int
    virtual_distance_m: float
    physical_distance_m: float
    mean_distance_between_resets_m: float
    mean_alignment_m: float
    mean_abs_curvature_deg_per_s: float
    redirected_fraction: float
    duration_s: float
    n_frames: int

    def to_dict(self) -> dict:
        return asdict(self)


def compute_trial_metrics(record: TrialRecord, walk_speed: float = 1.0) -> TrialMetrics:
    frames = record.frames
    n = frames.shape[0]
    if n == 0:
        raise ValueError("empty trial record")
    flags = record.resetting
    non_reset = flags == 0

    # per-frame virtual displacement; frame i covers motion i-1 -> i
    seg = np.hypot(np.diff(record.virt_x), np.diff(record.virt_y))
    total = float(seg.sum())
    walking = non_reset[1:] & (seg > 1e-12)

    pseg = np.hypot(np.diff(record.phys_x), np.diff(record.phys_y))
    physical_total = float(pseg.sum())

    curv = record.curvature_rad_per_m[1:][walking]
    mean_curv_deg_s = (float(np.abs(curv).mean()) * walk_speed * 180.0 / math.pi
                       if curv.size else 0.0)

    align = record.alignment_m[non_reset]
    mean_align = float(align.mean()) if align.size else 0.0

    g_t = record.g_t[non_reset]
    g_r = record.g_r[non_reset]
    c = record.curvature_rad_per_m[non_reset]
    redirected = (g_t != 1.0) | (c != 0.0) | (g_r != 1.0)
    fraction = float(redirected.mean()) if redirected.size else 0.0

    n_resets = record.n_resets
    return TrialMetrics(
        controller=record.controller,
        n_resets=n_resets,
        virtual_distance_m=total,
        physical_distance_m=physical_total,
        mean_distance_between_resets_m=physical_total / (n_resets + 1),
        mean_alignment_m=mean_align,
        mean_abs_curvature_deg_per_s=mean_curv_deg_s,
        redirected_fraction=fraction,
        duration_s=float(frames[-1, 0]) if n else 0.0,
        n_frames=n,
    )


@dataclass(eq=False)
class HeatMap:
    """Visit counts over square cells; row 0 sits at the grid origin."""

    counts: np.ndarray  # (ny, nx) int64
    origin: tuple[float, float]
    cell_size: float


def _grid_shape(bbox, cell: float) -> tuple[int, int]:
    x0, y0, x1, y1 = bbox
    nx = max(1, int(math.ceil((x1 - x0) / cell - 1e-9)))
    ny = max(1, int(math.ceil((y1 - y0) / cell - 1e-9)))
    return nx, ny


def physical_heatmap(records: Iterable[TrialRecord], env,
                     cell_size: float = DEFAULT_HEATMAP_CELL) -> HeatMap:
    """Aggregate physical-position visits (every frame) over ``env``'s bbox.

    Positions outside the bbox extend the grid (with a warning) rather
    than being dropped.
    """
    records = list(records)
    x0, y0, x1, y1 = env.bbox
    nx, ny = _grid_shape(env.bbox, cell_size)
    xs = np.concatenate([r.phys_x for r in records]) if records else np.empty(0)
    ys = np.concatenate([r.phys_y for r in records]) if records else np.empty(0)
    if xs.size == 0:
        return HeatMap(np.zeros((ny, nx), dtype=np.int64), (x0, y0), cell_size)
    ix = np.floor((xs - x0) / cell_size).astype(np.int64)
    iy = np.floor((ys - y0) / cell_size).astype(np.int64)
    # points numerically on the max edge belong to the last cell
    ix[(ix == nx) & (xs <= x1 + 1e-9)] = nx - 1
    iy[(iy == ny) & (ys <= y1 + 1e-9)] = ny - 1
    lo_x = min(0, int(ix.min()))
    lo_y = min(0, int(iy.min()))
    hi_x = max(nx - 1, int(ix.max()))
    hi_y = max(ny - 1, int(iy.max()))
    if (lo_x, lo_y) != (0, 0) or (hi_x, hi_y) != (nx - 1, ny - 1):
        logger.warning("positions outside the environment bbox; "
                       "heat map grid extended")
    w = hi_x - lo_x + 1
    h = hi_y - lo_y + 1
    flat = np.bincount((iy - lo_y) * w + (ix - lo_x), minlength=w * h)
    return HeatMap(flat.reshape(h, w).astype(np.int64),
                   (x0 + lo_x * cell_size, y0 + lo_y * cell_size), cell_size)


def write_heatmap_pgm(hm: HeatMap, path) -> None:
    """Plain (P2) PGM, counts scaled to 0-255, top row = highest y cells."""
    counts = hm.counts
    m = int(counts.max()) if counts.size else 0
    img = (np.rint(counts * (255.0 / m)).astype(np.int64) if m > 0
           else np.zeros_like(counts))
    h, w_ = img.shape
    lines = ["P2", f"{w_} {h}", "255"]
    for row in img[::-1]:
        lines.append(" ".join(str(int(v)) for v in row))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def write_heatmap_csv(hm: HeatMap, path) -> None:
    """Raw count grid, same row order as the PGM (top row = highest y)."""
    with open(path, "w") as f:
        for row in hm.counts[::-1]:
            f.write(",".join(str(int(v)) for v in row) + "\n")


def curvature_histogram(per_path_means_deg_s) -> np.ndarray:
    """Counts of per-path mean |curvature| rates over 0.5 deg/s bins, 0..8."""
    vals = np.clip(np.asarray(per_path_means_deg_s, dtype=float),
                   0.0, CURVATURE_BIN_EDGES[-1] - 1e-12)
    counts, _ = np.histogram(vals, bins=CURVATURE_BIN_EDGES)
    return counts


def write_curvature_histogram_csv(counts, path) -> None:
    with open(path, "w") as f:
        f.write("bin_low_deg_s,bin_high_deg_s,count\n")
        for k in range(len(counts)):
            f.write(f"{CURVATURE_BIN_EDGES[k]:.6f},{CURVATURE_BIN_EDGES[k + 1]:.6f},"
                    f"{int(counts[k])}\n")
