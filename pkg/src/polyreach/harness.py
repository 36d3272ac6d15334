"""Replication engine for the simulation study.

One replication: sample ``n`` points, build one distance transform with
``mc_points`` probes, run the lower-bound reach algorithm on the resulting
empirical volume curve, then fit the volume polynomial on ``[0.1, R_hat]``.
Every replication derives its seeds from ``(master_seed, index)`` only, so
reports do not depend on execution order or worker count.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InvalidConfigError, InvalidInputError, PolyReachError
from .geometry import Box, Disk, Frame, Pacman, Region, UnionOfSquares, region_from_config, sample_uniform
from .reach import (
    ReachConfig,
    SkippedFit,
    arithmetic_grid,
    estimate_coefficients,
    preset_grid,
    reach_lower_bound,
)
from .volume import empirical_volume_curve, exact_volume, exact_volume_curve, mc_distance_transform, probe_box

SANDWICH_SIGMAS = 3.0


def true_reach(region: Region) -> float:
    """Polynomial reach of a benchmark region (used for overestimation counts)."""
    if isinstance(region, Pacman):
        return 1.0
    if isinstance(region, UnionOfSquares):
        return region.half_gap
    if isinstance(region, Frame):
        return 0.5 * region.side
    if isinstance(region, (Disk, Box)):
        return math.inf
    raise InvalidInputError(f"no known polynomial reach for {type(region).__name__}")


def grid_family(region: Region) -> str:
    return "frame" if isinstance(region, Frame) else "disk_like"


def parse_grid(spec, region: Region):
    """``gr1|gr2|gr3`` presets for the region's family, or ``explicit:r1,r2,...``."""
    if isinstance(spec, (tuple, list)):
        return tuple(float(r) for r in spec)
    spec = str(spec).strip()
    if spec.startswith("explicit:"):
        try:
            return tuple(float(v) for v in spec[len("explicit:"):].split(","))
        except ValueError:
            raise InvalidConfigError(f"bad explicit grid {spec!r}") from None
    return preset_grid(spec, grid_family(region))


def parse_region(spec) -> Region:
    """Region from ``kind[:params]``: ``pacman``, ``union_of_squares:0.05``,
    ``frame:1``, ``disk:1``, ``box:x0,y0,x1,y1``."""
    if isinstance(spec, Region):
        return spec
    kind, _, arg = str(spec).strip().partition(":")
    try:
        vals = [float(v) for v in arg.split(",")] if arg else []
    except ValueError:
        raise InvalidConfigError(f"bad region parameters in {spec!r}") from None
    try:
        if kind == "pacman" and not vals:
            return Pacman()
        if kind in ("union_of_squares", "squares") and len(vals) <= 1:
            return UnionOfSquares(*vals)
        if kind == "frame" and len(vals) <= 1:
            return Frame(*vals)
        if kind == "disk" and len(vals) <= 1:
            return Disk(*vals)
        if kind == "box" and vals and len(vals) % 2 == 0:
            k = len(vals) // 2
            return Box(tuple(vals[:k]), tuple(vals[k:]))
    except InvalidInputError as exc:
        raise InvalidConfigError(str(exc)) from None
    raise InvalidConfigError(f"unknown region spec {spec!r}")


def region_spec(region: Region) -> str:
    """Inverse of :func:`parse_region`."""
    if isinstance(region, Pacman):
        return "pacman"
    if isinstance(region, UnionOfSquares):
        return f"union_of_squares:{region.half_gap!r}"
    if isinstance(region, Frame):
        return f"frame:{region.side!r}"
    if isinstance(region, Disk):
        return f"disk:{region.radius!r}"
    return "box:" + ",".join(repr(v) for v in (*region.lo, *region.hi))


@dataclass(frozen=True)
class ExperimentConfig:
    region: Region
    n: int
    replications: int = 100
    grid: tuple = preset_grid("gr1")
    grid_name: str = "gr1"
    ell: int = 10
    eta: float = 0.1
    d: int = 2
    mc_points: int = 1_000_000
    master_seed: int = 0
    workers: int = 1
    exact_oracle: bool = False
    fit_start: float = 0.1

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidConfigError("replications must be >= 1")
        if self.mc_points < 1:
            raise InvalidConfigError("mc_points must be >= 1")
        if self.workers < 1:
            raise InvalidConfigError("workers must be >= 1")
        self.reach_config  # validates grid, degrees and eta

    @property
    def reach_config(self) -> ReachConfig:
        return ReachConfig(self.grid, self.n, self.d, self.ell, self.eta, self.fit_start)

    @property
    def true_R(self):
        return true_reach(self.region)

    def to_dict(self):
        return {
            "region": self.region.to_config(),
            "n": self.n,
            "replications": self.replications,
            "grid": list(self.grid),
            "grid_name": self.grid_name,
            "ell": self.ell,
            "eta": self.eta,
            "d": self.d,
            "mc_points": self.mc_points,
            "master_seed": self.master_seed,
            "workers": self.workers,
            "exact_oracle": self.exact_oracle,
            "fit_start": self.fit_start,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["region"] = region_from_config(data["region"])
        data["grid"] = tuple(data["grid"])
        return cls(**data)


@dataclass
class ReplicationRecord:
    index: int
    R_hat: float = math.nan
    stopped_at_step0: bool = False
    step0_residual: float = math.nan
    theta: tuple | None = None
    skip_reason: str = ""
    error: str = ""
    sandwich_violations: int = 0
    sandwich_max_excess: float = -math.inf

    @property
    def failed(self):
        return bool(self.error)


def replication_seeds(master_seed, index):
    """Independent seed sequences for sampling and for Monte Carlo probes."""
    root = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return tuple(root.spawn(2))


def sandwich_check(curve, region):
    """Count grid radii where ``V_n(r) > V(r) + 3 * MC standard error``."""
    excess = (curve.values - exact_volume(region, curve.radii)) / np.maximum(curve.stderr, 1e-300)
    return int(np.sum(excess > SANDWICH_SIGMAS)), float(np.max(excess))


def run_replication(cfg: ExperimentConfig, index: int, workers: int = 1) -> ReplicationRecord:
    rec = ReplicationRecord(index)
    rcfg = cfg.reach_config
    try:
        if cfg.exact_oracle:
            curve = exact_volume_curve(cfg.region, np.asarray(rcfg.grid))
        else:
            s_sample, s_probe = replication_seeds(cfg.master_seed, index)
            cloud = sample_uniform(cfg.region, cfg.n, s_sample)
            box = probe_box(cfg.region, rcfg.grid[-1])
            dt = mc_distance_transform(cloud, box, cfg.mc_points, s_probe, workers=workers)
            grid = np.asarray(rcfg.grid)
            curve = empirical_volume_curve(dt, grid)
            rec.sandwich_violations, rec.sandwich_max_excess = sandwich_check(curve, cfg.region)
        est = reach_lower_bound(curve, rcfg)
        rec.R_hat = est.R_hat
        rec.stopped_at_step0 = est.stopped_at_step0
        rec.step0_residual = est.step0_residual
        coef = estimate_coefficients(curve, est.R_hat, rcfg.grid[0], rcfg.d)
        if isinstance(coef, SkippedFit):
            rec.skip_reason = coef.reason
        else:
            rec.theta = tuple(float(v) for v in coef.coefficients)
    except PolyReachError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _run_one(args):
    cfg, index = args
    return run_replication(cfg, index)


# ---------------------------------------------------------------------------
# aggregation


def _moments(x):
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return {"count": 0, "mean": math.nan, "sd": math.nan, "mad": math.nan, "sd_defined": False}
    med = np.median(x)
    return {
        "count": int(x.size),
        "mean": float(np.mean(x)),
        "sd": float(np.std(x, ddof=1)) if x.size > 1 else 0.0,
        "mad": float(np.median(np.abs(x - med))),
        "sd_defined": bool(x.size > 1),
    }


def aggregate(records, cfg: ExperimentConfig) -> dict:
    ok = [r for r in records if not r.failed]
    r_hat = [r.R_hat for r in ok]
    thetas = [r.theta for r in ok if r.theta is not None]
    true_R = cfg.true_R
    out = {
        "R_hat": _moments(r_hat),
        "overestimations": int(sum(r > true_R + 1e-12 for r in r_hat)),
        "step0_stops": int(sum(r.stopped_at_step0 for r in ok)),
        "skipped": int(sum(r.theta is None for r in ok)),
        "failed": len(records) - len(ok),
        "sandwich_violations": int(sum(r.sandwich_violations for r in ok)),
        "true_R": true_R if math.isfinite(true_R) else "inf",
    }
    for i in range(cfg.d + 1):
        out[f"theta{i}"] = _moments([t[i] for t in thetas])
    return out


@dataclass
class ReplicationReport:
    config: ExperimentConfig
    records: list
    aggregates: dict = field(default_factory=dict)


def run_experiment(cfg: ExperimentConfig, progress=None) -> ReplicationReport:
    """Run all replications (in a process pool when ``cfg.workers > 1``)."""
    jobs = [(cfg, i) for i in range(cfg.replications)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        records = []
        for job in jobs:
            records.append(_run_one(job))
            if progress is not None:
                progress(records[-1])
    records.sort(key=lambda r: r.index)
    failed = [r for r in records if r.failed]
    if failed:
        warnings.warn(f"{len(failed)} of {len(records)} replications failed; excluded from statistics")
    return ReplicationReport(cfg, records, aggregate(records, cfg))


def summarize(report: ReplicationReport):
    """Table rows ``(statistic, mean, sd, mad, count)`` in the layout of the result tables."""
    rows = []
    keys = ["R_hat"] + [f"theta{i}" for i in range(report.config.d + 1)]
    for key in keys:
        m = report.aggregates[key]
        rows.append({"statistic": key, "mean": m["mean"], "sd": m["sd"], "mad": m["mad"], "count": m["count"]})
    return rows


# ---------------------------------------------------------------------------
# report files

_CSV_FIELDS = [
    "index", "R_hat", "stopped_at_step0", "step0_residual", "theta",
    "skip_reason", "error", "sandwich_violations", "sandwich_max_excess",
]


def _record_row(r: ReplicationRecord):
    return {
        "index": r.index,
        "R_hat": repr(float(r.R_hat)),
        "stopped_at_step0": int(r.stopped_at_step0),
        "step0_residual": repr(float(r.step0_residual)),
        "theta": "" if r.theta is None else ";".join(repr(float(v)) for v in r.theta),
        "skip_reason": r.skip_reason,
        "error": r.error,
        "sandwich_violations": r.sandwich_violations,
        "sandwich_max_excess": repr(float(r.sandwich_max_excess)),
    }


def _record_from_row(row):
    return ReplicationRecord(
        index=int(row["index"]),
        R_hat=float(row["R_hat"]),
        stopped_at_step0=bool(int(row["stopped_at_step0"])),
        step0_residual=float(row["step0_residual"]),
        theta=tuple(float(v) for v in row["theta"].split(";")) if row["theta"] else None,
        skip_reason=row["skip_reason"],
        error=row["error"],
        sandwich_violations=int(row["sandwich_violations"]),
        sandwich_max_excess=float(row["sandwich_max_excess"]),
    )


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def write_report(report: ReplicationReport, path, fmt="csv"):
    """Write a report.

    ``csv``: per-replication rows at ``path`` and a ``.json`` sidecar with
    the configuration and aggregates.  ``json``: everything in one file.
    Returns the list of written paths.
    """
    if not str(path):
        raise InvalidInputError("empty output path")
    path = Path(path)
    head = {"config": report.config.to_dict(), "aggregates": report.aggregates}
    if fmt == "json":
        head["records"] = [_record_row(r) for r in report.records]
        path.write_text(json.dumps(_json_safe(head), indent=2))
        return [path]
    if fmt != "csv":
        raise InvalidInputError(f"unknown report format {fmt!r}")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_FIELDS)
        writer.writeheader()
        for r in report.records:
            writer.writerow(_record_row(r))
    side = path.with_suffix(".json")
    side.write_text(json.dumps(_json_safe(head), indent=2))
    return [path, side]


def _restore_floats(obj):
    if isinstance(obj, str) and obj in ("inf", "-inf", "nan"):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _restore_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore_floats(v) for v in obj]
    return obj


def read_report(path) -> ReplicationReport:
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        rows = data["records"]
    else:
        data = json.loads(path.with_suffix(".json").read_text())
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    cfg = ExperimentConfig.from_dict(data["config"])
    records = [_record_from_row({k: str(v) for k, v in row.items()}) for row in rows]
    return ReplicationReport(cfg, records, _restore_floats(data["aggregates"]))


# ---------------------------------------------------------------------------
# presets reproducing the result tables at desk scale


def table_configs(table, replications=100, mc_points=1_000_000, master_seed=0, workers=1):
    """``[(label, ExperimentConfig), ...]`` for result table 1..10.

    1-3: reach estimates for Pacman, squares, frame; 4: small-reach squares;
    5-10: coefficient estimates (Pacman, squares, frame at n = 5000 and 7000).
    """
    common = dict(replications=replications, mc_points=mc_points, master_seed=master_seed, workers=workers)

    def grids(region):
        return [(g, preset_grid(g, grid_family(region))) for g in ("gr1", "gr2", "gr3")]

    out = []
    if table in (1, 2, 3):
        region = {1: Pacman(), 2: UnionOfSquares(), 3: Frame(1.0)}[table]
        sizes = (5000, 7000, 9000) if table == 3 else (2000, 3000, 4000)
        ells = (30, 50) if table == 3 else (8, 10)
        for ell in ells:
            for n in sizes:
                for gname, grid in grids(region):
                    out.append((f"ell={ell} n={n} {gname}",
                                ExperimentConfig(region, n, grid=grid, grid_name=gname, ell=ell, **common)))
    elif table == 4:
        for n, lam, r1s in ((1000, 0.1, (0.15, 0.2, 0.25)), (1500, 0.05, (0.12, 0.15, 0.2)),
                            (1800, 0.05, (0.12, 0.15, 0.2))):
            for r1 in r1s:
                grid = arithmetic_grid(r1, 0.4, 1.98)
                out.append((f"n={n} lambda={lam} r1={r1}",
                            ExperimentConfig(UnionOfSquares(lam), n, grid=grid,
                                             grid_name=f"explicit:{r1}+0.4k", ell=10, **common)))
    elif table in range(5, 11):
        region = (Pacman(), UnionOfSquares(), Frame(1.0))[(table - 5) // 2]
        ell = 30 if table >= 9 else 8
        n = 5000 if table % 2 else 7000
        for gname, grid in grids(region):
            out.append((f"n={n} {gname}",
                        ExperimentConfig(region, n, grid=grid, grid_name=gname, ell=ell, **common)))
    else:
        raise InvalidConfigError(f"no preset for table {table}")
    return out


_CONFIG_KEYS = {
    "region": str, "n": int, "replications": int, "grid": str, "ell": int, "eta": float,
    "d": int, "mc_points": int, "seed": int, "master_seed": int, "workers": int,
    "exact_oracle": str, "fit_start": float,
}


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or key not in _CONFIG_KEYS:
            raise InvalidConfigError(f"{path}:{lineno}: unrecognised line {line!r}")
        try:
            out[key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise InvalidConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def config_from_mapping(data) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from flat string-ish settings."""
    data = dict(data)
    if "region" not in data or "n" not in data:
        raise InvalidConfigError("config needs at least region and n")
    region = parse_region(data.pop("region"))
    grid_name = str(data.pop("grid", "gr1"))
    if "seed" in data:
        data["master_seed"] = data.pop("seed")
    if "exact_oracle" in data:
        data["exact_oracle"] = str(data["exact_oracle"]).lower() in ("1", "true", "yes")
    return ExperimentConfig(region, grid=parse_grid(grid_name, region), grid_name=grid_name, **data)


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
