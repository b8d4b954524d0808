"""Campaign orchestration: one environment pair, P paths, K controllers.

Every controller replays the same virtual path from the same physical
start, so per-path metric differences are paired. All randomness is
keyed off (campaign seed XOR path index), making outputs byte-identical
across runs and worker counts; the parallelism knob and output
directory are therefore excluded from the serialized config.

Output layout::

    <out>/
      config.json             run parameters
      environment_pair.json   the pair actually used (fixed start applied)
      complexity.json         clearance stats and complexity ratio
      trials/<ctl>/path_###.csv
      metrics_<ctl>.csv       one row per path
      heatmap_<ctl>.pgm/.csv  physical visit counts
      curvature_hist_<ctl>.csv
      stats_summary.csv       paired bootstrap contrasts
      location_summary.csv    robust per-controller locations
      manifest.json           sha256 of every other file

A failed trial aborts the run: a FAILED marker naming the (path,
controller) is left in the output tree so partial results are never
mistaken for a finished campaign.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .complexity import complexity_ratio
from .environments import _MASK64, draw_physical_start, pair_to_json, resolve_pair
from .metrics import (
    HeatMap,
    compute_trial_metrics,
    curvature_histogram,
    physical_heatmap,
    write_curvature_histogram_csv,
    write_heatmap_csv,
    write_heatmap_pgm,
)
from .simulation import SimConfig, generate_path, run_trial, write_trial_csv
from .stats import quartiles, replace_outliers, robust_contrast, trimmed_mean

_BOOT_STREAM = 2  # SeedSequence stream tag for bootstrap draws

CONTRAST_METRICS = (
    "n_resets",
    "mean_distance_between_resets_m",
    "mean_alignment_m",
    "mean_abs_curvature_deg_per_s",
    "redirected_fraction",
)

# reporting order: each baseline against arc, then between baselines
_CONTRAST_ORDER = (("s2c", "arc"), ("apf", "arc"), ("s2c", "apf"))

_METRICS_COLUMNS = (
    "path", "seed", "n_resets", "virtual_distance_m", "physical_distance_m",
    "mean_distance_between_resets_m", "mean_alignment_m",
    "mean_abs_curvature_deg_per_s", "redirected_fraction",
    "duration_s", "n_frames",
)


@dataclass(frozen=True)
class CampaignConfig:
    pair: str = "A"                  # builtin name or JSON file path
    controllers: tuple = ("arc", "s2c", "apf")
    n_paths: int = 100
    n_waypoints: int = 100
    seed: int = 0
    sim: SimConfig = field(default_factory=SimConfig)
    fixed_start: bool = False
    output_dir: str = "rdw_out"
    workers: int = 1

    def to_json_dict(self) -> dict:
        # workers and output_dir cannot affect results; keeping them out
        # makes config.json (and so the manifest) run-invariant
        return {
            "pair": self.pair,
            "controllers": list(self.controllers),
            "n_paths": self.n_paths,
            "n_waypoints": self.n_waypoints,
            "seed": self.seed,
            "fixed_start": self.fixed_start,
            "sim": self.sim.to_dict(),
        }


def path_seed(campaign_seed: int, index: int) -> int:
    return (int(campaign_seed) ^ int(index)) & _MASK64


def contrast_pairs(names) -> list[tuple[str, str]]:
    """Ordered contrast pairs; sign convention is first minus second."""
    names = list(names)
    pairs = [(a, b) for a, b in _CONTRAST_ORDER if a in names and b in names]
    seen = {frozenset(p) for p in pairs}
    pairs.extend(p for p in itertools.combinations(names, 2)
                 if frozenset(p) not in seen)
    return pairs


@dataclass(eq=False)
class CampaignResult:
    output_dir: Path
    pair_name: str
    metrics: dict           # controller -> list[TrialMetrics], path order
    contrasts: list         # dicts: metric, contrast, ContrastResult fields


def _path_task(args):
    pair, sim, controllers, index, seed, n_waypoints, out_dir = args
    wpts = generate_path(pair.virtual, pair.virtual_start_position,
                         seed, n_waypoints, sim,
                         start_heading=pair.virtual_start_heading)
    start = draw_physical_start(pair, seed)
    rows = []
    for name in controllers:
        try:
            rec = run_trial(pair, name, wpts, start, sim)
        except Exception as exc:
            raise RuntimeError(
                f"trial failed: path {index}, controller {name}: {exc}"
            ) from exc
        if out_dir is not None:
            write_trial_csv(rec, Path(out_dir) / "trials" / name
                            / f"path_{index:03d}.csv")
        tm = compute_trial_metrics(rec, sim.walk_speed)
        hm = physical_heatmap([rec], pair.physical)
        rows.append((name, tm, hm.counts))
    return index, seed, rows


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_metrics_csv(path: Path, rows) -> None:
    with open(path, "w") as f:
        f.write(",".join(_METRICS_COLUMNS) + "\n")
        for index, seed, tm in rows:
            f.write(f"{index},{seed},{tm.n_resets},"
                    f"{tm.virtual_distance_m:.6f},"
                    f"{tm.physical_distance_m:.6f},"
                    f"{tm.mean_distance_between_resets_m:.6f},"
                    f"{tm.mean_alignment_m:.6f},"
                    f"{tm.mean_abs_curvature_deg_per_s:.6f},"
                    f"{tm.redirected_fraction:.6f},"
                    f"{tm.duration_s:.6f},{tm.n_frames}\n")


def _write_location_summary(path: Path, env_name, names,
                            per_metric_samples) -> None:
    lines = ["environment,metric,controller,trimmed_mean,q1,median,q3"]
    for metric in CONTRAST_METRICS:
        for name in names:
            sample = per_metric_samples[metric][name]
            est = trimmed_mean(replace_outliers(sample))
            q1, med, q3 = quartiles(sample)
            lines.append(f"{env_name},{metric},{name},{est:.6f},"
                         f"{q1:.6f},{med:.6f},{q3:.6f}")
    path.write_text("\n".join(lines) + "\n")


def _write_stats_summary(path: Path, env_name, names,
                         per_metric_samples, seed) -> list:
    """Bootstrap contrast rows; positive psi_hat = first scored more."""
    lines = ["environment,metric,contrast,psi_hat,ci_low,ci_high,n"]
    contrasts = []
    pairs = contrast_pairs(names)
    k = 0
    for metric in CONTRAST_METRICS:
        for a, b in pairs:
            rng = np.random.default_rng([seed & _MASK64, _BOOT_STREAM, k])
            k += 1
            res = robust_contrast(per_metric_samples[metric][a],
                                  per_metric_samples[metric][b], rng=rng)
            label = f"{a.upper()}_vs_{b.upper()}"
            contrasts.append({"metric": metric, "contrast": label,
                              **res.to_dict()})
            lines.append(f"{env_name},{metric},{label},{res.estimate:.6f},"
                         f"{res.ci_low:.6f},{res.ci_high:.6f},{res.n_pairs}")
    path.write_text("\n".join(lines) + "\n")
    return contrasts


def _write_manifest(out: Path) -> None:
    files = {}
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            files[p.relative_to(out).as_posix()] = hashlib.sha256(
                p.read_bytes()).hexdigest()
    _write_json(out / "manifest.json", {"algorithm": "sha256", "files": files})


def run_campaign(config: CampaignConfig) -> CampaignResult:
    if config.n_paths < 1 or config.n_waypoints < 1:
        raise ValueError("n_paths and n_waypoints must be >= 1")
    pair = resolve_pair(config.pair)
    if config.fixed_start:
        pair = pair.with_fixed_start()
    names = tuple(config.controllers)
    if not names:
        raise ValueError("no controllers requested")

    out = Path(config.output_dir)
    for name in names:
        (out / "trials" / name).mkdir(parents=True, exist_ok=True)
    _write_json(out / "config.json", config.to_json_dict())
    (out / "environment_pair.json").write_text(pair_to_json(pair))
    _write_json(out / "complexity.json", complexity_ratio(pair).to_dict())

    tasks = [(pair, config.sim, names, i, path_seed(config.seed, i),
              config.n_waypoints, str(out)) for i in range(config.n_paths)]
    try:
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as ex:
                results = list(ex.map(_path_task, tasks))
        else:
            results = [_path_task(t) for t in tasks]
    except Exception as exc:
        (out / "FAILED").write_text(f"{exc}\n")
        raise

    metrics = {name: [] for name in names}
    heat = {name: None for name in names}
    rows_by_ctl = {name: [] for name in names}
    for index, seed, rows in results:
        for name, tm, counts in rows:
            metrics[name].append(tm)
            rows_by_ctl[name].append((index, seed, tm))
            heat[name] = counts if heat[name] is None else heat[name] + counts

    per_metric_samples = {
        m: {name: np.array([getattr(tm, m) for tm in metrics[name]], dtype=float)
            for name in names}
        for m in CONTRAST_METRICS
    }

    for name in names:
        _write_metrics_csv(out / f"metrics_{name}.csv", rows_by_ctl[name])
        hm = HeatMap(heat[name], (pair.physical.bbox[0], pair.physical.bbox[1]),
                     0.5)
        write_heatmap_pgm(hm, out / f"heatmap_{name}.pgm")
        write_heatmap_csv(hm, out / f"heatmap_{name}.csv")
        hist = curvature_histogram(
            per_metric_samples["mean_abs_curvature_deg_per_s"][name])
        write_curvature_histogram_csv(hist, out / f"curvature_hist_{name}.csv")

    _write_location_summary(out / "location_summary.csv", pair.name, names,
                            per_metric_samples)
    contrasts = _write_stats_summary(out / "stats_summary.csv", pair.name,
                                     names, per_metric_samples, config.seed)
    _write_manifest(out)
    return CampaignResult(output_dir=out, pair_name=pair.name,
                          metrics=metrics, contrasts=contrasts)
