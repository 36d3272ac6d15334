"""Benchmark regions, uniform sampling and exact nearest-neighbour distances.

Regions are small frozen dataclasses with a vectorised membership test, a
tight bounding box and (for the planar shapes) a boundary parametrised by
arc length.  Distances from arbitrary query points to a sample are answered
by :class:`NeighborIndex`, a uniform grid with expanding ring search whose
answers are exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateRegionError,
    InvalidInputError,
    UnsupportedRegionError,
)

MIN_ACCEPTANCE_RATE = 1e-6
PROPOSAL_CAP = 10_000_000


@dataclass(frozen=True)
class BoundingBox:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or any(h < l for l, h in zip(lo, hi)):
            raise InvalidInputError(f"bad box corners {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def measure(self):
        return float(np.prod(np.subtract(self.hi, self.lo)))

    @property
    def diameter(self):
        return float(np.linalg.norm(np.subtract(self.hi, self.lo)))

    def padded(self, margin):
        return BoundingBox(
            tuple(v - margin for v in self.lo), tuple(v + margin for v in self.hi)
        )

    def contains_box(self, other):
        return all(a <= b for a, b in zip(self.lo, other.lo)) and all(
            a >= b for a, b in zip(self.hi, other.hi)
        )

    @classmethod
    def of_points(cls, points):
        points = np.atleast_2d(points)
        return cls(tuple(points.min(axis=0)), tuple(points.max(axis=0)))


# ---------------------------------------------------------------------------
# regions


def _as_points(p, dim):
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    if p.shape[-1] != dim:
        raise InvalidInputError(f"expected points of dimension {dim}, got {p.shape[-1]}")
    return p, single


class Region:
    """Common interface of the benchmark compact sets."""

    kind = "region"
    dim = 2

    def _contains(self, p):
        raise NotImplementedError

    def contains(self, p):
        """Closed-set membership; returns a bool for one point, an array otherwise."""
        pts, single = _as_points(p, self.dim)
        inside = self._contains(pts)
        return bool(inside[0]) if single else inside

    @property
    def bounding_box(self) -> BoundingBox:
        raise NotImplementedError

    @property
    def area(self) -> float:
        raise NotImplementedError

    def boundary_pieces(self):
        """List of ``("seg", p0, p1)`` / ``("arc", center, radius, a0, a1)`` pieces."""
        raise UnsupportedRegionError(f"{self.kind} has no boundary sampler")

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Pacman(Region):
    """Unit disk with the open first quadrant removed."""

    kind = "pacman"

    def _contains(self, p):
        x, y = p[:, 0], p[:, 1]
        return (x * x + y * y <= 1.0) & ~((x > 0) & (y > 0))

    @property
    def bounding_box(self):
        return BoundingBox((-1.0, -1.0), (1.0, 1.0))

    @property
    def area(self):
        return 0.75 * math.pi

    def boundary_pieces(self):
        return [
            ("arc", (0.0, 0.0), 1.0, 0.5 * math.pi, 2.0 * math.pi),
            ("seg", (0.0, 0.0), (1.0, 0.0)),
            ("seg", (0.0, 0.0), (0.0, 1.0)),
        ]

    def to_config(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class UnionOfSquares(Region):
    """``[-1,1]^2`` together with a translate of it at Euclidean distance ``2*half_gap``.

    The default ``half_gap=0.5`` gives ``[-1,1]^2 U [2,4]x[-1,1]``.  The
    dilations of the two squares first meet at radius ``half_gap``.
    """

    half_gap: float = 0.5
    kind = "union_of_squares"

    def __post_init__(self):
        if not self.half_gap >= 0:
            raise InvalidInputError("half_gap must be >= 0")

    @property
    def _x2(self):
        return 1.0 + 2.0 * self.half_gap

    def _contains(self, p):
        x, y = p[:, 0], p[:, 1]
        in_y = np.abs(y) <= 1.0
        return in_y & ((np.abs(x) <= 1.0) | ((x >= self._x2) & (x <= self._x2 + 2.0)))

    @property
    def bounding_box(self):
        return BoundingBox((-1.0, -1.0), (self._x2 + 2.0, 1.0))

    @property
    def area(self):
        return 8.0

    def boundary_pieces(self):
        pieces = []
        for x0 in (-1.0, self._x2):
            c = [(x0, -1.0), (x0 + 2.0, -1.0), (x0 + 2.0, 1.0), (x0, 1.0)]
            pieces += [("seg", c[i], c[(i + 1) % 4]) for i in range(4)]
        return pieces

    def to_config(self):
        return {"kind": self.kind, "half_gap": self.half_gap}


@dataclass(frozen=True)
class Frame(Region):
    """``[-1,1]^2`` minus the centred open square of side ``side``."""

    side: float = 1.0
    kind = "frame"

    def __post_init__(self):
        if not 0.0 < self.side <= 1.0:
            raise InvalidInputError("frame side must lie in (0, 1]")

    def _contains(self, p):
        m = np.max(np.abs(p), axis=1)
        return (m <= 1.0) & (m >= 0.5 * self.side)

    @property
    def bounding_box(self):
        return BoundingBox((-1.0, -1.0), (1.0, 1.0))

    @property
    def area(self):
        return 4.0 - self.side**2

    def boundary_pieces(self):
        pieces = []
        for h in (1.0, 0.5 * self.side):
            c = [(-h, -h), (h, -h), (h, h), (-h, h)]
            pieces += [("seg", c[i], c[(i + 1) % 4]) for i in range(4)]
        return pieces

    def to_config(self):
        return {"kind": self.kind, "side": self.side}


@dataclass(frozen=True)
class Disk(Region):
    """Closed Euclidean ball of ``radius`` centred at the origin (``dim`` 1 to 3)."""

    radius: float = 1.0
    dim: int = 2
    kind = "disk"

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInputError("disk radius must be positive")
        if self.dim not in (1, 2, 3):
            raise InvalidInputError("disk dimension must be 1, 2 or 3")

    def _contains(self, p):
        return np.einsum("ij,ij->i", p, p) <= self.radius**2

    @property
    def bounding_box(self):
        r = self.radius
        return BoundingBox((-r,) * self.dim, (r,) * self.dim)

    @property
    def area(self):
        return _ball_volume(self.dim) * self.radius**self.dim

    def boundary_pieces(self):
        if self.dim != 2:
            raise UnsupportedRegionError("boundary sampling of balls is planar only")
        return [("arc", (0.0, 0.0), self.radius, 0.0, 2.0 * math.pi)]

    def to_config(self):
        return {"kind": self.kind, "radius": self.radius, "dim": self.dim}


@dataclass(frozen=True)
class Box(Region):
    """Axis-aligned box with corners ``lo`` and ``hi``."""

    lo: tuple = (0.0, 0.0)
    hi: tuple = (1.0, 1.0)
    kind = "box"

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not 1 <= len(lo) <= 3:
            raise InvalidInputError("box corners must have equal dimension 1..3")
        if any(h <= l for l, h in zip(lo, hi)):
            raise InvalidInputError("box must have positive extent in every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def _contains(self, p):
        return np.all((p >= self.lo) & (p <= self.hi), axis=1)

    @property
    def bounding_box(self):
        return BoundingBox(self.lo, self.hi)

    @property
    def area(self):
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def boundary_pieces(self):
        if self.dim != 2:
            raise UnsupportedRegionError("boundary sampling of boxes is planar only")
        (x0, y0), (x1, y1) = self.lo, self.hi
        c = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        return [("seg", c[i], c[(i + 1) % 4]) for i in range(4)]

    def to_config(self):
        return {"kind": self.kind, "lo": list(self.lo), "hi": list(self.hi)}


def _ball_volume(d):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


_REGION_KINDS = {
    "pacman": Pacman,
    "union_of_squares": UnionOfSquares,
    "frame": Frame,
    "disk": Disk,
    "box": Box,
}


def region_from_config(config) -> Region:
    """Inverse of ``Region.to_config``."""
    config = dict(config)
    kind = config.pop("kind", None)
    if kind not in _REGION_KINDS:
        raise InvalidInputError(f"unknown region kind {kind!r}")
    cls = _REGION_KINDS[kind]
    if kind == "box":
        config = {k: tuple(v) for k, v in config.items()}
    try:
        return cls(**config)
    except TypeError as exc:
        raise InvalidInputError(str(exc)) from None


def contains(region: Region, p) -> bool:
    return region.contains(p)


# ---------------------------------------------------------------------------
# sampling


@dataclass
class PointCloud:
    """A finite sample together with its (lazily built) neighbour index."""

    points: np.ndarray
    seed: object = None
    _index: "NeighborIndex | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if not np.all(np.isfinite(self.points)):
            raise InvalidInputError("point coordinates must be finite")

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def index(self) -> "NeighborIndex":
        if self._index is None:
            self._index = build_index(self)
        return self._index


def sample_uniform(region: Region, n: int, seed=None) -> PointCloud:
    """Draw ``n`` iid uniform points in ``region`` by rejection from its bounding box."""
    if n < 1:
        raise InvalidInputError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    box = region.bounding_box
    lo, hi = np.array(box.lo), np.array(box.hi)
    rate = min(1.0, region.area / box.measure) if box.measure > 0 else 0.0
    accepted, n_accepted, proposed = [], 0, 0
    while n_accepted < n:
        need = n - n_accepted
        batch = int(min(max(1.1 * need / max(rate, 1e-3) + 16, 64), 1 << 20))
        cand = rng.uniform(lo, hi, size=(batch, box.dim))
        keep = cand[region._contains(cand)]
        proposed += batch
        accepted.append(keep)
        n_accepted += len(keep)
        if proposed >= PROPOSAL_CAP and n_accepted / proposed < MIN_ACCEPTANCE_RATE:
            raise DegenerateRegionError(
                f"acceptance rate {n_accepted / proposed:.2e} after {proposed} proposals"
            )
    return PointCloud(np.concatenate(accepted)[:n], seed=seed)


# ---------------------------------------------------------------------------
# exact nearest neighbours on a uniform grid


def _chebyshev_shell(k, dim):
    """Integer offsets with Chebyshev norm exactly ``k``."""
    if k == 0:
        return np.zeros((1, dim), dtype=np.int64)
    rng = range(-k, k + 1)
    offs = np.array(list(itertools.product(rng, repeat=dim)), dtype=np.int64)
    return offs[np.abs(offs).max(axis=1) == k]


class NeighborIndex:
    """Uniform grid bucketing of a point set answering exact distance queries.

    Points are stored sorted by flattened cell id; ``_cells`` holds the
    occupied ids and ``_starts`` the offsets into the sorted point array.
    """

    def __init__(self, points, cell_size):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        n, self.dim = self.points.shape
        if n == 0:
            raise InvalidInputError("cannot index an empty cloud")
        if not cell_size > 0:
            raise InvalidInputError("cell size must be positive")
        self.cell_size = float(cell_size)
        self.origin = self.points.min(axis=0)
        extent = self.points.max(axis=0) - self.origin
        self.shape = np.floor(extent / self.cell_size).astype(np.int64) + 1
        coords = self._cell_coords(self.points)
        ids = np.ravel_multi_index(coords.T, self.shape)
        order = np.argsort(ids, kind="stable")
        self._sorted = self.points[order]
        self._order = order
        ids = ids[order]
        self._cells, self._starts = np.unique(ids, return_index=True)
        self._ends = np.append(self._starts[1:], n)

    def __len__(self):
        return self.points.shape[0]

    def _cell_coords(self, q):
        c = np.floor((q - self.origin) / self.cell_size).astype(np.int64)
        return np.clip(c, 0, self.shape - 1)

    def _ring_lower_bound(self, q, home, k):
        """Smallest possible distance from ``q`` to any cell in rings ``>= k``."""
        h = self.cell_size
        hi_side = self.origin + (home + k) * h - q
        lo_side = q - (self.origin + (home - k + 1) * h)
        hi_side = np.where(home + k <= self.shape - 1, np.maximum(hi_side, 0.0), np.inf)
        lo_side = np.where(home - k >= 0, np.maximum(lo_side, 0.0), np.inf)
        return np.minimum(hi_side, lo_side).min(axis=1)

    def query(self, q):
        """Exact Euclidean distance from each row of ``q`` to the indexed set."""
        q = np.asarray(q, dtype=float)
        single = q.ndim == 1
        q = np.atleast_2d(q)
        if q.shape[1] != self.dim:
            raise InvalidInputError(f"query dimension {q.shape[1]} != {self.dim}")
        best = np.full(len(q), np.inf)
        home = self._cell_coords(q)
        active = np.arange(len(q))
        k = 0
        while active.size:
            offs = _chebyshev_shell(k, self.dim)
            cells = home[active, None, :] + offs[None, :, :]
            valid = np.all((cells >= 0) & (cells < self.shape), axis=2)
            qi, oi = np.nonzero(valid)
            if qi.size:
                ids = np.ravel_multi_index(cells[qi, oi].T, self.shape)
                slot = np.searchsorted(self._cells, ids)
                slot = np.minimum(slot, len(self._cells) - 1)
                hit = self._cells[slot] == ids
                qi, slot = active[qi[hit]], slot[hit]
                counts = self._ends[slot] - self._starts[slot]
                if counts.sum():
                    rep_q = np.repeat(qi, counts)
                    base = np.repeat(self._starts[slot] - np.cumsum(counts) + counts, counts)
                    pidx = base + np.arange(counts.sum())
                    diff = self._sorted[pidx] - q[rep_q]
                    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
                    np.minimum.at(best, rep_q, dist)
            k += 1
            lb = self._ring_lower_bound(q[active], home[active], k)
            active = active[best[active] > lb]
        return float(best[0]) if single else best


def build_index(cloud, cell_size=None) -> NeighborIndex:
    """Grid index over ``cloud``; default cell size is the mean spacing ``(|bbox|/n)^(1/d)``."""
    pts = cloud.points if isinstance(cloud, PointCloud) else np.atleast_2d(cloud)
    if pts.size == 0:
        raise InvalidInputError("cannot index an empty cloud")
    if cell_size is None:
        n, d = pts.shape
        extent = pts.max(axis=0) - pts.min(axis=0)
        cell_size = (np.prod(extent) / n) ** (1.0 / d)
        if not cell_size > 0:
            cell_size = max(float(extent.max()) / n, 1.0)
    return NeighborIndex(pts, cell_size)


def distance_to_cloud(index: NeighborIndex, q):
    return index.query(q)


# ---------------------------------------------------------------------------
# boundary probes


def _piece_length(piece):
    if piece[0] == "seg":
        return math.dist(piece[1], piece[2])
    _, _, r, a0, a1 = piece
    return r * (a1 - a0)


def sample_boundary(region: Region, k: int, seed=None) -> np.ndarray:
    """``k`` points uniform with respect to arc length on the boundary of ``region``."""
    pieces = region.boundary_pieces()
    lengths = np.array([_piece_length(p) for p in pieces])
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.0, lengths.sum(), size=k)
    which = np.minimum(np.searchsorted(np.cumsum(lengths), s, side="right"), len(pieces) - 1)
    u = (s - (np.cumsum(lengths) - lengths)[which]) / lengths[which]
    out = np.empty((k, 2))
    for j, piece in enumerate(pieces):
        sel = which == j
        if piece[0] == "seg":
            p0, p1 = np.array(piece[1]), np.array(piece[2])
            out[sel] = p0 + u[sel, None] * (p1 - p0)
        else:
            _, c, r, a0, a1 = piece
            ang = a0 + u[sel] * (a1 - a0)
            out[sel] = np.column_stack([c[0] + r * np.cos(ang), c[1] + r * np.sin(ang)])
    return out


def boundary_gap(cloud: PointCloud, region: Region, probes: int = 2000, seed=None) -> float:
    """Largest distance from a boundary probe to the cloud.

    Approximates ``max_{p in dS} d(p, cloud)`` from below.
    """
    pts = sample_boundary(region, probes, seed)
    return float(np.max(cloud.index.query(pts)))


# ---------------------------------------------------------------------------
# I/O


def save_cloud_csv(cloud: PointCloud, path):
    header = ",".join(f"x{i + 1}" for i in range(cloud.dim))
    np.savetxt(path, cloud.points, delimiter=",", header=header, comments="", fmt="%.17g")


def load_cloud_csv(path) -> PointCloud:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if not header or any(h != f"x{i + 1}" for i, h in enumerate(header)):
        raise InvalidInputError(f"{path}: expected header x1,...,xd")
    pts = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return PointCloud(pts.reshape(-1, len(header)))
