"""
Thresholding a single coefficient
=================================

With one coordinate the penalized problem is
``1/2 (b - t)^2 + lam |b|^p / p``.  For small lambda there are two nonzero
critical points (a local max near zero, a local min near t); they merge at
``lambda_bar`` and disappear.  The global minimiser jumps to zero earlier,
at ``lambda_gl``.
"""

import numpy as np

from lpcritpath import ProblemInstance, lambda_bar, lambda_global_jump, main_path, scalar_critical_points

t, p = 1.0, 0.5
lb = lambda_bar(t, p)
lam_gl, beta_gl = lambda_global_jump(t, p)
print(f"lambda_bar = {lb:.12f}  (closed form {2 * (1 / 3) ** 1.5:.12f})")
print(f"global jump at lambda = {lam_gl:.12f}, from beta = {beta_gl:.6f} to 0")

# roots on both sides of the merge
for lam in (0.1, 0.3, lb, 0.5):
    crit = scalar_critical_points(t, lam, p)
    print(f"lam = {lam:.4f}: roots {np.round(crit.roots, 6)} tags {crit.tags}")

###############################################################################
# The traced main path runs from beta* = 1 down to 0 and turns once in lambda

path = main_path(ProblemInstance.from_gram([[1.0]], [t], p))
seg = path.segments[0]
tp = seg.turning_points[0].location
print(f"{len(path.points)} points, turning point at beta = {tp.beta[0]:.6f}, lambda = {tp.lam:.9f}")
print("Q classes along the path:", sorted({pt.class_Q for pt in path.points}))
