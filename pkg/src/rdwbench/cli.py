"""Command-line entry point (``rdw-bench``).

The ``run`` subcommand defaults to a fast desk-scale profile
(20 paths x 50 waypoints); ``--full`` switches to the full-scale
protocol (100 x 100) over every builtin environment pair. All float
output is fixed to six decimal places.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .campaign import CampaignConfig, path_seed, run_campaign
from .complexity import complexity_ratio
from .environments import BUILTIN_PAIRS, resolve_pair
from .metrics import compute_trial_metrics
from .simulation import SimConfig, generate_path, read_trial_csv

DESK_PATHS, DESK_WAYPOINTS = 20, 50
FULL_PATHS, FULL_WAYPOINTS = 100, 100


def _resolve_workers(flag_value: int | None) -> int:
    env = os.environ.get("RDW_BENCH_WORKERS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, flag_value if flag_value is not None else 1)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rdw-bench",
        description="Redirected-walking controller benchmark")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a campaign and write results")
    run.add_argument("--pair", default="A",
                     help="builtin pair name or environment-pair JSON file")
    run.add_argument("--full", action="store_true",
                     help="full-scale profile: every builtin pair, "
                          f"{FULL_PATHS} paths x {FULL_WAYPOINTS} waypoints, "
                          "into <out>/<name>/")
    run.add_argument("--controllers", default="arc,s2c,apf",
                     help="comma-separated subset of arc,s2c,apf")
    run.add_argument("--paths", type=int, default=None,
                     help=f"paths per campaign (default {DESK_PATHS}, "
                          f"{FULL_PATHS} with --full)")
    run.add_argument("--waypoints", type=int, default=None,
                     help=f"waypoints per path (default {DESK_WAYPOINTS}, "
                          f"{FULL_WAYPOINTS} with --full)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default="rdw_out")
    run.add_argument("--workers", type=int, default=None,
                     help="parallel path workers (env RDW_BENCH_WORKERS "
                          "overrides)")
    run.add_argument("--fixed-start", action="store_true",
                     help="pin the physical start instead of drawing it")

    cx = sub.add_parser("complexity", help="print clearance stats and ratio")
    cx.add_argument("--pair", default="A")
    cx.add_argument("--spacing", type=float, default=0.5)

    paths = sub.add_parser("paths", help="dump generated waypoint paths as CSV")
    paths.add_argument("--pair", default="A")
    paths.add_argument("--paths", type=int, default=1)
    paths.add_argument("--waypoints", type=int, default=DESK_WAYPOINTS)
    paths.add_argument("--seed", type=int, default=0)

    replay = sub.add_parser("replay", help="recompute metrics from a trial CSV")
    replay.add_argument("csv")
    replay.add_argument("--controller", default="")
    replay.add_argument("--walk-speed", type=float, default=1.0)
    return p


def _round6(obj):
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _round6(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round6(v) for v in obj]
    return obj


def _cmd_run(args) -> int:
    controllers = tuple(s.strip() for s in args.controllers.split(",") if s.strip())
    n_paths = args.paths if args.paths is not None else (
        FULL_PATHS if args.full else DESK_PATHS)
    n_waypoints = args.waypoints if args.waypoints is not None else (
        FULL_WAYPOINTS if args.full else DESK_WAYPOINTS)
    pair_refs = list(BUILTIN_PAIRS) if args.full else [args.pair]
    workers = _resolve_workers(args.workers)
    for ref in pair_refs:
        out = str(Path(args.out) / ref) if args.full else args.out
        config = CampaignConfig(pair=ref, controllers=controllers,
                                n_paths=n_paths, n_waypoints=n_waypoints,
                                seed=args.seed, sim=SimConfig(),
                                fixed_start=args.fixed_start,
                                output_dir=out, workers=workers)
        result = run_campaign(config)
        print(f"pair {result.pair_name}: {len(controllers)} controllers x "
              f"{n_paths} paths -> {result.output_dir}")
    return 0


def _cmd_complexity(args) -> int:
    pair = resolve_pair(args.pair)
    report = complexity_ratio(pair, spacing=args.spacing)
    print(json.dumps(_round6(report.to_dict()), sort_keys=True, indent=2))
    return 0


def _cmd_paths(args) -> int:
    pair = resolve_pair(args.pair)
    cfg = SimConfig()
    print("path,seed,waypoint,x,y")
    for i in range(args.paths):
        seed = path_seed(args.seed, i)
        wpts = generate_path(pair.virtual, pair.virtual_start_position,
                             seed, args.waypoints, cfg,
                             start_heading=pair.virtual_start_heading)
        for k, (x, y) in enumerate(wpts):
            print(f"{i},{seed},{k},{x:.6f},{y:.6f}")
    return 0


def _cmd_replay(args) -> int:
    record = read_trial_csv(args.csv, controller=args.controller)
    tm = compute_trial_metrics(record, walk_speed=args.walk_speed)
    print(json.dumps(_round6(tm.to_dict()), sort_keys=True, indent=2))
    return 0


_HANDLERS = {
    "run": _cmd_run,
    "complexity": _cmd_complexity,
    "paths": _cmd_paths,
    "replay": _cmd_replay,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except Exception as exc:
        print(f"rdw-bench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
