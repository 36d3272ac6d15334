"""
Best polynomial approximation on an interval
============================================

Fits minimise a discrete L2 norm on a 0.001 grid.  On an interval where the
volume is a polynomial the residual vanishes; past the polynomial range it
does not.
"""
import numpy as np

from polyreach import Frame, Pacman, exact_volume_curve, l2_project

radii = np.linspace(0, 2, 2001)
frame = exact_volume_curve(Frame(1.0), radii)
pacman = exact_volume_curve(Pacman(), radii)

fit = l2_project(frame, (0.05, 0.45), degree=2)
print("frame coefficients on [0.05, 0.45]:", np.round(fit.coefficients, 6), "residual", fit.residual)

for interval in ((0.1, 1.0), (0.5, 1.5), (1.0, 1.98)):
    r = l2_project(pacman, interval, degree=2).residual
    print(f"pacman degree-2 residual on {interval}: {r:.2e}")

###############################################################################
# Raising the degree never increases the residual.
print([f"{l2_project(pacman, (0.5, 1.98), k).residual:.1e}" for k in (2, 4, 8, 16)])
