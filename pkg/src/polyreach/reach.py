"""Polynomial-reach estimators and coefficient estimation.

``reach_lower_bound`` scans a radius grid ``r_1 < ... < r_K``.  A degree-``d``
fit on ``[t0, r_1]`` whose residual exceeds ``U_n`` yields 0 immediately;
otherwise the ratios

    c_i = ||V - P_d on [t0, r_i]|| / ||V - P_ell on [r_i, r_K]||,  i < K

are formed and the estimate is ``r_{i-1}`` for the first ``c_i > 1``
(``r_0 = 0``), or ``r_{K-1}`` when no ratio exceeds one.

The numerator intervals nominally start at 0.  Empirical curves satisfy
``V_n(0) = 0`` while ``V(0)`` is the area of the set, and that boundary-layer
deficit alone swamps every denominator, so fits start at
``t0 = min(0.1, r_1 / 2)``.  Set ``fit_start=0`` for the literal intervals.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidConfigError, NumericalFailureError
from .polyfit import NORM_STEP, PolyFit, l2_project, norm_grid, weighted_fit

# Residuals below ZERO_RTOL * max|V| * sqrt(interval length) are exact zeros
# up to rounding; only noiseless curves ever reach this level.
ZERO_RTOL = 1e-10

COEF_START = 0.1
COEF_STEP = 0.01

R_END = {"disk_like": 1.98, "frame": 1.5}
PAPER_GRIDS = {
    "disk_like": {"gr1": (0.2, 0.4), "gr2": (0.3, 0.3), "gr3": (0.3, 0.4)},
    "frame": {"gr1": (0.1, 0.2), "gr2": (0.1, 0.25), "gr3": (0.2, 0.3)},
}


def arithmetic_grid(r1, step, r_end):
    """``r1, r1+step, ...`` strictly below ``r_end``, then ``r_end`` itself."""
    k = int(math.floor((r_end - r1) / step + 1e-9))
    grid = [round(r1 + j * step, 10) for j in range(k + 1)]
    grid = [r for r in grid if r < r_end - 1e-9]
    return tuple(grid + [float(r_end)])


def preset_grid(name, family="disk_like"):
    """Preset grids: ``family`` is ``"disk_like"`` (Pacman, squares) or ``"frame"``."""
    try:
        r1, step = PAPER_GRIDS[family][name]
    except KeyError:
        raise InvalidConfigError(f"unknown grid {name!r} for family {family!r}") from None
    return arithmetic_grid(r1, step, R_END[family])


def threshold_U(n, d, eta):
    """``(log n / n) ** (1/(2d) - eta)``."""
    if n < 2:
        raise InvalidConfigError("threshold needs n >= 2")
    expo = 1.0 / (2 * d) - eta
    if not eta > 0 or expo <= 0:
        raise InvalidConfigError(f"eta must lie in (0, 1/(2d)) = (0, {1 / (2 * d):g})")
    return (math.log(n) / n) ** expo


@dataclass(frozen=True)
class ReachConfig:
    grid: tuple
    n: int
    d: int = 2
    ell: int = 10
    eta: float = 0.1
    fit_start: float = COEF_START

    def __post_init__(self):
        g = tuple(float(r) for r in self.grid)
        object.__setattr__(self, "grid", g)
        if len(g) < 2:
            raise InvalidConfigError("grid needs at least two radii")
        if not g[0] > 0 or any(b <= a for a, b in zip(g, g[1:])):
            raise InvalidConfigError("grid must be strictly increasing with r_1 > 0")
        if self.d < 1 or self.ell < self.d:
            raise InvalidConfigError("need d >= 1 and ell >= d")
        if self.fit_start < 0:
            raise InvalidConfigError("fit_start must be >= 0")
        threshold_U(self.n, self.d, self.eta)

    @property
    def t0(self):
        """Left end of the degree-``d`` fits."""
        return min(self.fit_start, 0.5 * self.grid[0])

    @property
    def threshold(self):
        return threshold_U(self.n, self.d, self.eta)


@dataclass
class ReachEstimate:
    R_hat: float
    stopped_at_step0: bool
    step0_residual: float
    threshold: float
    grid: tuple
    c: tuple = ()
    numerators: tuple = ()
    denominators: tuple = ()

    def to_dict(self):
        out = asdict(self)
        out["c"] = [_json_float(v) for v in self.c]
        return out


def _json_float(v):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _snap(res, y, length):
    scale = max(1.0, float(np.max(np.abs(y)))) * math.sqrt(length)
    return 0.0 if res <= ZERO_RTOL * scale else res


def _interval_residual(curve, a, b, degree, step):
    """Residual of the best degree-``degree`` fit on [a, b], snapped to 0 at rounding level."""
    t, w = norm_grid(a, b, step)
    y = np.asarray(curve(t), dtype=float)
    fit = weighted_fit(t, y, w, degree, (a, b), context=f"[{a:g}, {b:g}]")
    return _snap(fit.residual, y, b - a)


def ratio(num, den):
    """``num / den`` with ``0/0 = 0`` and ``x/0 = inf``."""
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def reach_lower_bound(curve, cfg: ReachConfig, step=NORM_STEP) -> ReachEstimate:
    """Lower-bound estimate of the polynomial reach from a volume curve."""
    grid = cfg.grid
    r_K = grid[-1]
    t0 = cfg.t0
    try:
        num0 = _interval_residual(curve, t0, grid[0], cfg.d, step)
    except NumericalFailureError as exc:
        exc.context = f"step 0 on [{t0:g}, {grid[0]:g}]: {exc.context}"
        raise
    U = cfg.threshold
    if num0 > U:
        return ReachEstimate(0.0, True, num0, U, grid)

    nums, dens, cs = [num0], [], []
    for i, r in enumerate(grid[:-1]):
        try:
            if i > 0:
                nums.append(_interval_residual(curve, t0, r, cfg.d, step))
            dens.append(_interval_residual(curve, r, r_K, cfg.ell, step))
        except NumericalFailureError as exc:
            exc.context = f"grid index {i + 1}: {exc.context}"
            raise
        cs.append(ratio(nums[-1], dens[-1]))

    R_hat = grid[-2]
    for i, c in enumerate(cs):
        if c > 1.0:
            R_hat = grid[i - 1] if i > 0 else 0.0
            break
    return ReachEstimate(R_hat, False, num0, U, grid, tuple(cs), tuple(nums), tuple(dens))


@dataclass
class ConsistentEstimate:
    radius: float
    exceeded: bool
    scan: np.ndarray = field(repr=False, default=None)
    G: np.ndarray = field(repr=False, default=None)


def default_epsilon(n, d=2, eta=0.1, scale=1.0):
    return scale * threshold_U(n, d, eta)


def polynomial_defect(curve, t, d=2, step=NORM_STEP):
    """``G(t) = ||V - P_d||`` on ``[0, t]``."""
    return l2_project(curve, (0.0, t), d, step).residual


def reach_consistent(curve, eps, t_min=0.1, t_max=None, scan_step=0.01, d=2, step=NORM_STEP):
    """First scanned ``t`` with ``G(t) > eps``; ``t_max`` flagged not exceeded otherwise."""
    if not eps > 0:
        raise InvalidConfigError("eps must be > 0")
    if t_max is None:
        t_max = float(curve.r_max)
    k = int(round((t_max - t_min) / scan_step))
    scan = np.round(t_min + scan_step * np.arange(k + 1), 10)
    G = np.full(scan.size, np.nan)
    for j, t in enumerate(scan):
        G[j] = polynomial_defect(curve, t, d, step)
        if G[j] > eps:
            return ConsistentEstimate(float(t), True, scan, G)
    return ConsistentEstimate(float(t_max), False, scan, G)


@dataclass(frozen=True)
class SkippedFit:
    reason: str

    def to_dict(self):
        return {"skipped": True, "reason": self.reason}


def coefficient_grid(R_hat, start=COEF_START, step=COEF_STEP):
    k = int(math.floor((R_hat - start) / step + 1e-9))
    return np.round(start + step * np.arange(k + 1), 10)


def estimate_coefficients(curve, R_hat, r1, d=2, start=COEF_START, step=COEF_STEP):
    """Least-squares degree-``d`` fit of ``curve`` on ``{start, start+step, ..., R_hat}``.

    Runs with ``R_hat <= r1`` (including a step-0 stop) are skipped.
    """
    if R_hat <= 0:
        return SkippedFit("step0")
    if R_hat <= r1 + 1e-12:
        return SkippedFit("r_hat_is_r1")
    t = coefficient_grid(R_hat, start, step)
    if t.size < d + 1:
        return SkippedFit("too_few_nodes")
    y = np.asarray(curve(t), dtype=float)
    fit = weighted_fit(t, y, np.ones_like(t), d, (float(t[0]), float(t[-1])))
    w = np.full(t.size, step)
    w[0] = w[-1] = 0.5 * step
    resid = float(np.sqrt(np.sum(w * (y - fit(t)) ** 2)))
    return PolyFit(fit.interval, fit.degree, fit.basis_coef, resid, fit.condition)
