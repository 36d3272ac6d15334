"""Volume functions of dilations: Monte Carlo for samples, closed forms for benchmarks.

The empirical volume ``V_n(r) = mu(B(X_n, r))`` is read off a single
distance transform: ``m`` uniform probes in a box are mapped to their
distance from the sample, sorted once, and ``V_n(r)`` becomes the box
measure times the empirical CDF of those distances at ``r``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError, OutOfRangeError, UnsupportedRegionError
from .geometry import (
    BoundingBox,
    Box,
    Disk,
    Frame,
    Pacman,
    PointCloud,
    Region,
    UnionOfSquares,
    _ball_volume,
    region_from_config,
)

PROBE_MARGIN = 0.1
_CHUNK = 1 << 18


# ---------------------------------------------------------------------------
# exact volume functions


def _pacman_volume(t):
    t = np.asarray(t, dtype=float)
    poly = 0.75 * np.pi + (2.0 + 1.5 * np.pi) * t + (1.25 * np.pi - 1.0) * t * t
    # Beyond t = 1 the dilations of the two radii of the removed quadrant
    # overlap in a region that is no longer the square [0, t]^2.
    tt = np.maximum(t, 1.0)
    xs = 0.5 * (1.0 + np.sqrt(2.0 * tt * tt - 1.0))

    def F(u):
        return 0.5 * (u * np.sqrt(np.maximum(tt * tt - u * u, 0.0)) + tt * tt * np.arcsin(np.clip(u / tt, -1, 1)))

    overlap = tt + F(xs - 1.0) + (tt - xs) + 0.25 * np.pi * tt * tt - F(xs)
    far = 0.75 * np.pi * (1.0 + tt) ** 2 + 2.0 * tt + 0.5 * np.pi * tt * tt - overlap
    return np.where(t <= 1.0, poly, far)


def _union_of_squares_volume(t, half_gap):
    t = np.asarray(t, dtype=float)
    g = 2.0 * half_gap
    single = 4.0 + 8.0 * t + np.pi * t * t
    tt = np.maximum(t, half_gap)
    u0 = np.sqrt(np.maximum(tt * tt - half_gap * half_gap, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        cap = tt * tt * np.arcsin(np.where(tt > 0, u0 / np.where(tt > 0, tt, 1.0), 0.0)) - 0.5 * g * u0
    overlap = 2.0 * (2.0 * tt - g) + 2.0 * cap
    return 2.0 * single - np.where(t > half_gap, overlap, 0.0)


def _frame_volume(t, side):
    t = np.asarray(t, dtype=float)
    inner = 4.0 - side**2 + 4.0 * (side + 2.0) * t + (np.pi - 4.0) * t * t
    outer = 4.0 + 8.0 * t + np.pi * t * t
    return np.where(t <= 0.5 * side, inner, outer)


def _box_volume(t, lo, hi):
    t = np.asarray(t, dtype=float)
    e = np.subtract(hi, lo)
    if len(e) == 1:
        return e[0] + 2.0 * t
    if len(e) == 2:
        return e[0] * e[1] + 2.0 * (e[0] + e[1]) * t + np.pi * t * t
    a, b, c = e
    return (
        a * b * c
        + 2.0 * (a * b + b * c + c * a) * t
        + np.pi * (a + b + c) * t * t
        + 4.0 / 3.0 * np.pi * t**3
    )


def exact_volume(region: Region, t):
    """Exact ``V(t) = mu(B(S, t))`` for the benchmark regions (vectorised in ``t``)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise InvalidInputError("dilation radius must be >= 0")
    if isinstance(region, Pacman):
        v = _pacman_volume(t_arr)
    elif isinstance(region, UnionOfSquares):
        v = _union_of_squares_volume(t_arr, region.half_gap)
    elif isinstance(region, Frame):
        v = _frame_volume(t_arr, region.side)
    elif isinstance(region, Disk):
        v = _ball_volume(region.dim) * (region.radius + t_arr) ** region.dim
    elif isinstance(region, Box):
        v = _box_volume(t_arr, region.lo, region.hi)
    else:
        raise UnsupportedRegionError(f"no exact volume function for {type(region).__name__}")
    return float(v) if np.ndim(t) == 0 else v


# ---------------------------------------------------------------------------
# curves


@dataclass
class VolumeCurve:
    """Volume values on an increasing radius grid.

    ``evaluator``, when present, gives exact values at arbitrary radii (the
    scaled CDF of a distance transform, or a closed form); otherwise values
    between grid nodes are linearly interpolated.
    """

    radii: np.ndarray
    values: np.ndarray
    provenance: dict = field(default_factory=dict)
    stderr: np.ndarray | None = None
    evaluator: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.radii.shape != self.values.shape or self.radii.ndim != 1:
            raise InvalidInputError("radii and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.radii) <= 0):
            raise InvalidInputError("radii must be strictly increasing")
        if np.any(self.radii < 0) or np.any(self.values < 0):
            raise InvalidInputError("radii and volumes must be >= 0")
        scale = max(1.0, float(np.max(self.values, initial=0.0)))
        if np.any(np.diff(self.values) < -1e-12 * scale):
            raise InvalidInputError("volume curve must be nondecreasing")

    @property
    def r_max(self):
        return float(self.radii[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.evaluator is not None:
            return self.evaluator(t)
        if np.any(t < self.radii[0] - 1e-12) or np.any(t > self.radii[-1] + 1e-12):
            raise OutOfRangeError(
                f"radius outside tabulated range [{self.radii[0]}, {self.radii[-1]}]"
            )
        return np.interp(t, self.radii, self.values)


def fine_grid(r_max, step=1e-3, r_min=0.0):
    """Endpoint-inclusive grid with spacing at most ``step``."""
    n = max(int(math.ceil((r_max - r_min) / step - 1e-9)), 1)
    return np.linspace(r_min, r_max, n + 1)


def exact_volume_curve(region: Region, radii) -> VolumeCurve:
    radii = np.asarray(radii, dtype=float)
    return VolumeCurve(
        radii,
        exact_volume(region, radii),
        provenance={"kind": "exact", "region": region.to_config()},
        evaluator=lambda t: exact_volume(region, t),
    )


# ---------------------------------------------------------------------------
# Monte Carlo distance transform


@dataclass
class DistanceTransform:
    """Sorted distances from ``m`` uniform probes in ``box`` to a sample."""

    distances: np.ndarray
    box: BoundingBox
    seed: object = None
    safe_radius: float = float("inf")

    @property
    def m(self):
        return self.distances.size

    def _check(self, r):
        if np.any(r < 0):
            raise OutOfRangeError("radius must be >= 0")
        if np.any(r > self.safe_radius + 1e-12):
            raise OutOfRangeError(
                f"radius {float(np.max(r)):.4g} exceeds the probe-box padding {self.safe_radius:.4g}"
            )

    def fraction(self, r):
        r = np.asarray(r, dtype=float)
        self._check(r)
        return np.searchsorted(self.distances, r, side="right") / self.m

    def volume(self, r):
        return self.box.measure * self.fraction(r)

    def stderr(self, r):
        p = self.fraction(r)
        return self.box.measure * np.sqrt(p * (1.0 - p) / self.m)


def probe_box(region: Region, r_max: float) -> BoundingBox:
    """Region bounding box padded by ``r_max + 0.1``."""
    return region.bounding_box.padded(r_max + PROBE_MARGIN)


def probe_generator(seed) -> np.random.Generator:
    """Counter-based stream for Monte Carlo probes."""
    return np.random.Generator(np.random.Philox(seed))


def mc_distance_transform(cloud: PointCloud, box: BoundingBox, m: int, seed=None, workers=1):
    """Distances from ``m`` iid uniform probes in ``box`` to ``cloud``, sorted.

    Probes are drawn sequentially from one Philox stream, so the result does
    not depend on ``workers``.
    """
    if m < 1:
        raise InvalidInputError("number of Monte Carlo probes must be >= 1")
    pts = cloud.points if isinstance(cloud, PointCloud) else np.atleast_2d(cloud)
    if pts.shape[1] != box.dim:
        raise InvalidInputError("cloud and box dimensions differ")
    cbox = BoundingBox.of_points(pts)
    if not box.contains_box(cbox):
        raise InvalidInputError("probe box does not contain the cloud")
    safe = min(
        min(c - b for c, b in zip(cbox.lo, box.lo)),
        min(b - c for c, b in zip(cbox.hi, box.hi)),
    )
    tree = cKDTree(pts)
    gen = probe_generator(seed)
    lo, hi = np.array(box.lo), np.array(box.hi)
    out = np.empty(m)
    for start in range(0, m, _CHUNK):
        k = min(_CHUNK, m - start)
        probes = gen.uniform(lo, hi, size=(k, box.dim))
        out[start:start + k], _ = tree.query(probes, workers=workers)
    out.sort()
    return DistanceTransform(out, box, seed=seed, safe_radius=float(safe))


def empirical_volume_curve(dt: DistanceTransform, radii) -> VolumeCurve:
    radii = np.asarray(radii, dtype=float)
    return VolumeCurve(
        radii,
        dt.volume(radii),
        provenance={
            "kind": "empirical",
            "mc_points": dt.m,
            "box_measure": dt.box.measure,
            "box": [list(dt.box.lo), list(dt.box.hi)],
            "seed": _jsonable_seed(dt.seed),
        },
        stderr=dt.stderr(radii),
        evaluator=dt.volume,
    )


def _jsonable_seed(seed):
    if seed is None or isinstance(seed, (int, str)):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return {"entropy": seed.entropy, "spawn_key": list(seed.spawn_key)}
    return repr(seed)


# ---------------------------------------------------------------------------
# I/O


def save_curve(curve: VolumeCurve, path):
    """Write ``r,volume`` CSV plus a ``.json`` metadata sidecar."""
    path = Path(path)
    np.savetxt(
        path,
        np.column_stack([curve.radii, curve.values]),
        delimiter=",",
        header="r,volume",
        comments="",
        fmt="%.17g",
    )
    meta = dict(curve.provenance)
    if curve.stderr is not None:
        meta["stderr"] = [float(v) for v in curve.stderr]
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2))


def load_curve(path) -> VolumeCurve:
    path = Path(path)
    with open(path) as fh:
        if fh.readline().strip() != "r,volume":
            raise InvalidInputError(f"{path}: expected header r,volume")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    meta_path = path.with_suffix(".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    stderr = meta.pop("stderr", None)
    curve = VolumeCurve(data[:, 0], data[:, 1], provenance=meta,
                        stderr=None if stderr is None else np.asarray(stderr))
    if meta.get("kind") == "exact" and "region" in meta:
        region = region_from_config(meta["region"])
        curve.evaluator = lambda t: exact_volume(region, t)
    return curve
