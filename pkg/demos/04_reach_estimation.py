"""
Estimating the polynomial reach
===============================

The lower-bound algorithm compares, along a grid of radii, how badly a
quadratic fits up to ``r_i`` against how badly a high-degree polynomial fits
beyond it.  The estimate is the grid value just before the first ratio above
one.
"""
import numpy as np

from polyreach import (
    Pacman,
    ReachConfig,
    empirical_volume_curve,
    exact_volume_curve,
    fine_grid,
    mc_distance_transform,
    preset_grid,
    probe_box,
    reach_lower_bound,
    sample_uniform,
)

region = Pacman()
grid = preset_grid("gr1")
cfg = ReachConfig(grid, n=4000, d=2, ell=10)
print("grid:", grid, " threshold U_n:", round(cfg.threshold, 4))

exact = exact_volume_curve(region, np.linspace(0, 2, 2001))
est = reach_lower_bound(exact, cfg)
print("noiseless curve: R_hat =", est.R_hat, " c =", np.round(est.c, 3))

###############################################################################
# The same procedure on a sample of 4000 points.
cloud = sample_uniform(region, 4000, seed=11)
dt = mc_distance_transform(cloud, probe_box(region, grid[-1]), m=1_000_000, seed=12)
curve = empirical_volume_curve(dt, fine_grid(grid[-1]))
est = reach_lower_bound(curve, cfg)
print("sample:          R_hat =", est.R_hat, " c =", np.round(est.c, 3))
