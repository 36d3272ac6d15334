"""Command line interface.

Exit codes: 0 on success, 2 for invalid input or configuration, 3 when a
least-squares solve fails numerically.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import NumericalFailureError, PolyReachError
from .geometry import BoundingBox, load_cloud_csv, sample_uniform, save_cloud_csv
from .harness import (
    config_from_mapping,
    parse_grid,
    parse_region,
    read_config_file,
    run_experiment,
    summarize,
    table_configs,
    with_overrides,
    write_report,
)
from .polyfit import l2_project
from .reach import ReachConfig, estimate_coefficients, preset_grid, reach_lower_bound
from .volume import (
    PROBE_MARGIN,
    empirical_volume_curve,
    fine_grid,
    load_curve,
    mc_distance_transform,
    probe_box,
    save_curve,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
DEFAULT_MC = 1_000_000


def _emit(obj, out):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _grid(args, region=None):
    if region is not None:
        return parse_grid(args.grid, region)
    if args.grid.startswith("explicit:"):
        return parse_grid(args.grid, None)
    return preset_grid(args.grid, args.family)


def cmd_sample(args):
    region = parse_region(args.region)
    cloud = sample_uniform(region, args.n, args.seed)
    if args.out:
        save_cloud_csv(cloud, args.out)
    else:
        save_cloud_csv(cloud, sys.stdout)


def cmd_volume_curve(args):
    cloud = load_cloud_csv(args.cloud)
    if args.region:
        box = probe_box(parse_region(args.region), args.r_max)
    else:
        box = BoundingBox.of_points(cloud.points).padded(args.r_max + PROBE_MARGIN)
    dt = mc_distance_transform(cloud, box, args.mc_points or DEFAULT_MC, args.seed, workers=args.workers)
    curve = empirical_volume_curve(dt, fine_grid(args.r_max, args.step))
    save_curve(curve, args.out)


def cmd_fit(args):
    curve = load_curve(args.curve)
    fit = l2_project(curve, _floats(args.interval), args.degree)
    _emit(fit.to_dict(), args.out)


def cmd_reach(args):
    curve = load_curve(args.curve)
    region = parse_region(args.region) if args.region else None
    cfg = ReachConfig(_grid(args, region), args.n, args.d, args.ell, args.eta, args.fit_start)
    _emit(reach_lower_bound(curve, cfg).to_dict(), args.out)


def cmd_coeffs(args):
    curve = load_curve(args.curve)
    res = estimate_coefficients(curve, args.r_hat, args.r1, args.d)
    _emit(res.to_dict(), args.out)


def _overrides(args):
    return {
        "master_seed": args.seed,
        "workers": args.workers,
        "mc_points": args.mc_points,
        "ell": args.ell,
        "eta": args.eta,
    }


def cmd_replicate(args):
    data = read_config_file(args.config)
    if args.grid is not None:
        data["grid"] = args.grid
    if args.replications is not None:
        data["replications"] = args.replications
    cfg = with_overrides(config_from_mapping(data), **_overrides(args))
    report = run_experiment(cfg)
    if args.out:
        write_report(report, args.out, args.format)
    _print_rows(summarize(report), report.aggregates)


def _print_rows(rows, agg):
    for row in rows:
        print(f"{row['statistic']:>7s}  mean {row['mean']:.4f}  sd {row['sd']:.4f}  "
              f"mad {row['mad']:.4f}  n {row['count']}")
    print(f"overestimations {agg['overestimations']}  step0 stops {agg['step0_stops']}  "
          f"skipped {agg['skipped']}  failed {agg['failed']}")


def cmd_tables(args):
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for table in args.table:
        for label, cfg in table_configs(table, replications=args.replications):
            cfg = with_overrides(cfg, **_overrides(args))
            print(f"table {table}: {label}")
            report = run_experiment(cfg)
            _print_rows(summarize(report), report.aggregates)
            name = f"table{table}_" + label.replace(" ", "_").replace("=", "")
            write_report(report, out_dir / f"{name}.csv", "csv")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (master seed for replications)")
    common.add_argument("--workers", type=int, default=None, help="parallel workers")
    common.add_argument("--mc-points", type=int, default=None, help=f"Monte Carlo probes (default {DEFAULT_MC})")
    common.add_argument("--grid", default=None, help="gr1|gr2|gr3|explicit:<r1,...,rK>")
    common.add_argument("--ell", type=int, default=None, help="denominator degree")
    common.add_argument("--eta", type=float, default=None, help="threshold exponent offset")
    common.add_argument("--out", default=None, help="output path")

    p = argparse.ArgumentParser(prog="polyreach", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common], help="sample a region to a CSV cloud")
    s.add_argument("--region", required=True)
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("volume-curve", parents=[common], help="Monte Carlo volume curve of a cloud")
    s.add_argument("--cloud", required=True)
    s.add_argument("--region", default=None, help="size the probe box from this region")
    s.add_argument("--r-max", type=float, default=1.98)
    s.add_argument("--step", type=float, default=1e-3)
    s.set_defaults(func=cmd_volume_curve, need_out=True)

    s = sub.add_parser("fit", parents=[common], help="best polynomial approximation on an interval")
    s.add_argument("--curve", required=True)
    s.add_argument("--interval", required=True, help="a,b")
    s.add_argument("--degree", type=int, default=2)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("reach", parents=[common], help="lower-bound polynomial reach estimate")
    s.add_argument("--curve", required=True)
    s.add_argument("--n", type=int, required=True, help="sample size behind the curve")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--region", default=None, help="pick preset grids for this region")
    s.add_argument("--family", default="disk_like", choices=["disk_like", "frame"])
    s.add_argument("--fit-start", type=float, default=0.1)
    s.set_defaults(func=cmd_reach)

    s = sub.add_parser("coeffs", parents=[common], help="volume polynomial coefficients on [0.1, R_hat]")
    s.add_argument("--curve", required=True)
    s.add_argument("--r-hat", type=float, required=True)
    s.add_argument("--r1", type=float, required=True)
    s.add_argument("--d", type=int, default=2)
    s.set_defaults(func=cmd_coeffs)

    s = sub.add_parser("replicate", parents=[common], help="run an experiment config file")
    s.add_argument("config")
    s.add_argument("--replications", type=int, default=None)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.set_defaults(func=cmd_replicate)

    s = sub.add_parser("tables", parents=[common], help="preset experiments for the result tables")
    s.add_argument("--table", type=int, nargs="+", default=list(range(1, 11)))
    s.add_argument("--replications", type=int, default=100)
    s.set_defaults(func=cmd_tables)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "need_out", False) and not args.out:
        parser.error("--out is required")
    if args.command in ("fit", "reach", "coeffs"):
        args.ell = 10 if args.ell is None else args.ell
        args.eta = 0.1 if args.eta is None else args.eta
        args.grid = args.grid or "gr1"
    if args.command in ("sample", "volume-curve"):
        args.workers = args.workers or 1
    try:
        args.func(args)
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc} ({exc.context}; condition {exc.condition:.3g})", file=sys.stderr)
        return EXIT_NUMERICAL
    except (PolyReachError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
