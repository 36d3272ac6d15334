"""
Benchmark regions and uniform samples
=====================================

Three planar sets drive the simulations: a disk with one quadrant removed,
two squares separated by a gap, and a square frame.  Each one knows its
bounding box and answers membership queries exactly.
"""
import numpy as np

from polyreach import Frame, Pacman, UnionOfSquares, boundary_gap, build_index, sample_uniform

regions = {"pacman": Pacman(), "squares": UnionOfSquares(), "frame": Frame(1.0)}
for name, region in regions.items():
    print(f"{name:8s} area {region.area:.4f}  box {region.bounding_box.lo} .. {region.bounding_box.hi}")

# Rejection sampling from the bounding box; the seed fixes the sample.
cloud = sample_uniform(Pacman(), 2000, seed=1)
inside_quadrant = np.sum((cloud.points[:, 0] > 0) & (cloud.points[:, 1] > 0))
print("points in the removed quadrant:", inside_quadrant)

# Exact distances from arbitrary points to the sample through the grid index.
index = build_index(cloud)
probes = np.array([[0.0, 0.0], [0.5, 0.5], [2.0, 0.0]])
print("distances to the sample:", np.round(index.query(probes), 4))

###############################################################################
# The boundary gap estimates how far the boundary sits from the sample.  It
# shrinks as the sample grows.
for n in (200, 2000, 20000):
    c = sample_uniform(Pacman(), n, seed=n)
    print(f"n = {n:6d}  boundary gap {boundary_gap(c, Pacman(), 2000, seed=0):.4f}")
