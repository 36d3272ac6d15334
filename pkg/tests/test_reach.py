import json
import math

import numpy as np
import pytest
from scipy import integrate

from polyreach import (
    Frame,
    InvalidConfigError,
    Pacman,
    PolyFit,
    ReachConfig,
    SkippedFit,
    UnionOfSquares,
    estimate_coefficients,
    exact_volume,
    exact_volume_curve,
    preset_grid,
    reach_consistent,
    reach_lower_bound,
    threshold_U,
)
from polyreach.harness import true_reach
from polyreach.reach import ratio

GR1 = (0.2, 0.6, 1.0, 1.4, 1.8, 1.98)


def exact(region):
    return exact_volume_curve(region, np.linspace(0, 2, 2001))


def quadratic(t):
    return 2.0 + 3.0 * t + 0.5 * t * t


# -- grids and threshold ------------------------------------------------------------

def test_preset_grids():
    assert preset_grid("gr1") == GR1
    assert preset_grid("gr2") == (0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 1.98)
    assert preset_grid("gr3") == (0.3, 0.7, 1.1, 1.5, 1.9, 1.98)
    assert preset_grid("gr1", "frame") == (0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5)
    assert preset_grid("gr2", "frame") == (0.1, 0.35, 0.6, 0.85, 1.1, 1.35, 1.5)
    assert preset_grid("gr3", "frame") == (0.2, 0.5, 0.8, 1.1, 1.4, 1.5)
    with pytest.raises(InvalidConfigError):
        preset_grid("gr9")


def test_threshold_examples():
    assert threshold_U(1000, 2, 0.1) == pytest.approx(0.47413, abs=5e-6)
    assert threshold_U(1000, 2, 0.1) == pytest.approx((math.log(1000) / 1000) ** 0.15, rel=1e-14)
    n = math.e**2
    for d, eta in ((1, 0.2), (3, 0.05)):
        e = 1 / (2 * d) - eta
        assert threshold_U(n, d, eta) == pytest.approx((2 / math.e**2) ** e, rel=1e-12)
    with pytest.raises(InvalidConfigError):
        threshold_U(1000, 2, 0.25)
    with pytest.raises(InvalidConfigError):
        threshold_U(1, 2, 0.1)


def test_reach_config_validation():
    ReachConfig(GR1, 4000, eta=0.1)
    for bad in (dict(grid=(0.5,)), dict(grid=(0.0, 1.0)), dict(grid=(0.5, 0.4)), dict(ell=1), dict(eta=0.3),
                dict(fit_start=-1)):
        kw = dict(grid=GR1, n=4000) | bad
        with pytest.raises(InvalidConfigError):
            ReachConfig(**kw)


def test_ratio_conventions():
    assert ratio(0.0, 0.0) == 0.0
    assert ratio(1e-3, 0.0) == math.inf
    assert ratio(1.0, 2.0) == 0.5


# -- lower bound on exact curves --------------------------------------------------------

def test_pacman_gr1_exact():
    est = reach_lower_bound(exact(Pacman()), ReachConfig(GR1, 4000, 2, 10))
    assert not est.stopped_at_step0
    assert est.R_hat <= 1.0 and est.R_hat in (0.6, 1.0)
    assert len(est.c) == len(GR1) - 1


def test_polynomial_curve_reaches_second_last():
    for name in ("gr1", "gr2", "gr3"):
        grid = preset_grid(name)
        est = reach_lower_bound(quadratic, ReachConfig(grid, 2000))
        assert not est.stopped_at_step0 and est.step0_residual < 1e-9
        assert est.R_hat == grid[-2]


def test_literal_intervals_on_polynomial():
    est = reach_lower_bound(quadratic, ReachConfig(GR1, 2000, fit_start=0.0))
    assert est.R_hat == GR1[-2] and est.step0_residual < 1e-9


@pytest.mark.parametrize("region", [Pacman(), UnionOfSquares(), Frame(1.0)])
@pytest.mark.parametrize("gname", ["gr1", "gr2", "gr3"])
@pytest.mark.parametrize("ell", [8, 10, 30])
def test_exact_curve_soundness(region, gname, ell):
    family = "frame" if isinstance(region, Frame) else "disk_like"
    grid = preset_grid(gname, family)
    est = reach_lower_bound(exact(region), ReachConfig(grid, 4000, 2, ell))
    assert est.R_hat <= true_reach(region)
    assert est.R_hat in (0.0,) + grid[:-1]


def test_step0_triggers_on_large_defect():
    # a jump inside [t0, r1] no quadratic can follow
    curve = lambda t: np.where(t < 0.15, 0.0, 10.0)  # noqa: E731
    est = reach_lower_bound(curve, ReachConfig(GR1, 4000))
    assert est.stopped_at_step0 and est.R_hat == 0.0 and est.c == ()
    assert est.step0_residual > est.threshold


def test_output_rule_on_synthetic_ratios():
    # break exactly at 1.0: numerators vanish up to 1.0, then grow
    curve = lambda t: quadratic(t) + np.where(t > 1.0, 5 * (t - 1.0) ** 3, 0.0)  # noqa: E731
    est = reach_lower_bound(curve, ReachConfig(GR1, 4000, ell=10))
    first = next((i for i, c in enumerate(est.c) if c > 1), None)
    expected = GR1[-2] if first is None else (GR1[first - 1] if first > 0 else 0.0)
    assert est.R_hat == expected
    assert est.c[0] == 0.0 and est.c[1] == 0.0


def test_denominators_nonincreasing_in_ell():
    curve = exact(Pacman())
    dens = [reach_lower_bound(curve, ReachConfig(GR1, 4000, ell=ell)).denominators for ell in (4, 8, 10, 30)]
    for a, b in zip(dens, dens[1:]):
        assert all(y <= x + 1e-12 for x, y in zip(a, b))


def test_estimate_serialises():
    est = reach_lower_bound(exact(Pacman()), ReachConfig(GR1, 4000))
    data = json.loads(json.dumps(est.to_dict()))
    assert data["R_hat"] == est.R_hat and len(data["c"]) == 5
    assert {"numerators", "denominators", "threshold", "grid"} <= set(data)


# -- consistent estimator ----------------------------------------------------------------------

def _quadrature_G(t):
    """Continuous ||V - P_2||_{L2[0, t]} for the Pacman volume by adaptive quadrature."""
    k = np.arange(3)
    G = (t ** (k[:, None] + k[None, :] + 1)) / (k[:, None] + k[None, :] + 1)
    pts = [1.0] if t > 1 else None
    rhs = [integrate.quad(lambda s, j=j: s**j * exact_volume(Pacman(), s), 0, t, points=pts, epsabs=1e-14)[0]
           for j in k]
    a = np.linalg.solve(G, rhs)
    sq = integrate.quad(lambda s: (exact_volume(Pacman(), s) - np.polyval(a[::-1], s)) ** 2, 0, t,
                        points=pts, epsabs=1e-18, epsrel=1e-11)[0]
    return math.sqrt(max(sq, 0.0))


def test_consistent_polynomial_not_exceeded():
    curve = exact_volume_curve(Frame(1.0), np.linspace(0, 0.5, 501))
    est = reach_consistent(curve, 1e-6, t_max=0.5)
    assert not est.exceeded and est.radius == 0.5


def test_consistent_pacman_matches_quadrature_oracle():
    est = reach_consistent(exact(Pacman()), 1e-4, t_max=1.98)
    assert est.exceeded
    # oracle: first 0.01-scan point whose continuous defect exceeds 1e-4
    assert _quadrature_G(est.radius) > 1e-4
    assert _quadrature_G(round(est.radius - 0.01, 2)) <= 1e-4
    assert est.radius == pytest.approx(1.15)
    assert est.radius > 1.0


def test_consistent_monotone_in_eps():
    curve = exact(Pacman())
    radii = [reach_consistent(curve, eps, t_max=1.98).radius for eps in (1e-6, 1e-5, 1e-4, 1e-3, 1e-2)]
    assert radii == sorted(radii)


def test_consistent_rejects_bad_eps():
    with pytest.raises(InvalidConfigError):
        reach_consistent(exact(Pacman()), 0.0)


# -- coefficients ------------------------------------------------------------------------------

def test_coefficients_pacman():
    fit = estimate_coefficients(exact(Pacman()), 1.0, 0.2)
    assert isinstance(fit, PolyFit)
    np.testing.assert_allclose(fit.coefficients, [2.3562, 6.7124, 2.9270], atol=1e-4)
    assert fit.interval == (0.1, 1.0)


def test_coefficients_frame():
    fit = estimate_coefficients(exact(Frame(1.0)), 0.5, 0.1)
    np.testing.assert_allclose(fit.coefficients, [3, 12, -0.8584], atol=1e-4)


def test_coefficients_skipped():
    curve = exact(Pacman())
    assert estimate_coefficients(curve, 0.2, 0.2) == SkippedFit("r_hat_is_r1")
    assert estimate_coefficients(curve, 0.0, 0.2) == SkippedFit("step0")
    assert estimate_coefficients(curve, 0.11, 0.05) == SkippedFit("too_few_nodes")
    assert estimate_coefficients(curve, 0.0, 0.2).to_dict() == {"skipped": True, "reason": "step0"}


def test_coefficient_nodes_are_the_stated_grid():
    seen = []

    def curve(t):
        seen.append(np.array(t))
        return quadratic(np.asarray(t))

    estimate_coefficients(curve, 0.6, 0.2)
    np.testing.assert_allclose(seen[0], np.arange(10, 61) / 100)
