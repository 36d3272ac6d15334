"""Best L2 polynomial approximation of volume curves on an interval.

Norms are discrete: trapezoid weights on an endpoint-inclusive grid of
spacing at most 0.001, so ``sqrt(sum w_j f(t_j)^2)`` approximates the
``L2([a, b])`` integral norm.  Fits are solved in a shifted Legendre basis
(well conditioned up to the degrees used here) and converted to monomial
coefficients only on request.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Legendre, Polynomial
from numpy.polynomial import legendre as leg

from .errors import InvalidInputError, NumericalFailureError

NORM_STEP = 1e-3
MAX_DEGREE = 60


@dataclass(frozen=True)
class PolyFit:
    interval: tuple
    degree: int
    basis_coef: tuple
    residual: float = 0.0
    condition: float = 1.0

    @property
    def _series(self):
        return Legendre(np.asarray(self.basis_coef), domain=list(self.interval))

    @property
    def coefficients(self):
        """Monomial coefficients ``(theta_0, ..., theta_degree)``."""
        c = self._series.convert(kind=Polynomial).coef
        out = np.zeros(self.degree + 1)
        out[: len(c)] = c
        return out

    def __call__(self, t):
        return self._series(np.asarray(t, dtype=float))

    @classmethod
    def from_monomial(cls, coefficients, interval=(0.0, 1.0), residual=0.0):
        coefficients = np.asarray(coefficients, dtype=float)
        series = Polynomial(coefficients).convert(kind=Legendre, domain=list(interval))
        c = np.zeros(len(coefficients))
        c[: len(series.coef)] = series.coef
        return cls(tuple(map(float, interval)), len(coefficients) - 1, tuple(c), float(residual))

    def to_dict(self):
        return {
            "interval": list(self.interval),
            "degree": self.degree,
            "coefficients": [float(v) for v in self.coefficients],
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, data):
        return cls.from_monomial(data["coefficients"], tuple(data["interval"]), data["residual"])


def norm_grid(a, b, step=NORM_STEP):
    """Nodes and trapezoid weights for the discrete ``L2([a, b])`` norm."""
    if not 0 <= a < b:
        raise InvalidInputError(f"need 0 <= a < b, got [{a}, {b}]")
    n = max(int(np.ceil((b - a) / step - 1e-9)), 1)
    t = np.linspace(a, b, n + 1)
    w = np.full(n + 1, (b - a) / n)
    w[0] *= 0.5
    w[-1] *= 0.5
    return t, w


def _values(curve, t):
    return np.asarray(curve(t), dtype=float) if callable(curve) else np.asarray(curve, dtype=float)


def weighted_fit(t, y, w, degree, interval=None, context=None) -> PolyFit:
    """Minimise ``sum w_j (y_j - p(t_j))^2`` over polynomials of the given degree."""
    if not 0 <= degree <= MAX_DEGREE:
        raise InvalidInputError(f"degree must lie in [0, {MAX_DEGREE}]")
    t, y, w = (np.asarray(v, dtype=float) for v in (t, y, w))
    a, b = interval if interval is not None else (t[0], t[-1])
    if len(np.unique(t)) <= degree:
        raise NumericalFailureError(
            f"{len(t)} nodes cannot determine a degree-{degree} fit", context=context
        )
    x = (2.0 * t - (a + b)) / (b - a)
    sw = np.sqrt(w)
    design = leg.legvander(x, degree) * sw[:, None]
    coef, _, rank, sv = np.linalg.lstsq(design, y * sw, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if rank < degree + 1:
        raise NumericalFailureError(
            f"rank {rank} < {degree + 1} in degree-{degree} fit on [{a}, {b}]",
            condition=cond,
            context=context,
        )
    resid = float(np.sqrt(np.sum(w * (y - leg.legval(x, coef)) ** 2)))
    return PolyFit((float(a), float(b)), int(degree), tuple(coef), resid, cond)


def l2_project(curve, interval, degree, step=NORM_STEP) -> PolyFit:
    """Best approximation of ``curve`` on ``interval`` by a polynomial of degree ``degree``.

    ``curve`` is any callable of radius (a :class:`VolumeCurve`, a closed
    form) evaluated on the norm grid.
    """
    a, b = map(float, interval)
    t, w = norm_grid(a, b, step)
    return weighted_fit(t, _values(curve, t), w, degree, (a, b), context=f"[{a:g}, {b:g}]")


def _same_interval(i1, i2):
    return np.allclose(i1, i2, rtol=0, atol=1e-12)


def residual_norm(curve, interval, fit: PolyFit, step=NORM_STEP) -> float:
    if not _same_interval(interval, fit.interval):
        raise InvalidInputError(f"fit interval {fit.interval} != {tuple(interval)}")
    t, w = norm_grid(*map(float, interval), step)
    return float(np.sqrt(np.sum(w * (_values(curve, t) - fit(t)) ** 2)))


def eval_poly(fit: PolyFit, t):
    return fit(t)


def coefficient_distance(f: PolyFit, g: PolyFit) -> float:
    if f.degree != g.degree or not _same_interval(f.interval, g.interval):
        raise InvalidInputError("fits differ in degree or interval")
    return float(np.max(np.abs(f.coefficients - g.coefficients)))


def gram_matrix(interval, degree):
    """``G_ij = int_a^b t^(i+j) dt`` for the monomial basis."""
    a, b = map(float, interval)
    k = np.add.outer(np.arange(degree + 1), np.arange(degree + 1)) + 1
    return (b**k - a**k) / k


def norm_equivalence_constant(interval, degree):
    """Smallest ``kappa`` with ``max_i |alpha_i| <= kappa * ||sum alpha_i t^i||_L2``."""
    ginv = np.linalg.inv(gram_matrix(interval, degree))
    return float(np.sqrt(np.max(np.diag(ginv))))
