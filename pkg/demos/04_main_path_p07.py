"""
Penalty level along the main path
=================================

For ``p = 0.7`` the penalty level ``c = F_p(beta)`` does not decrease
monotonically along the main path.  Between the lambda turning point and
the c-minimum the constrained problem still sees a local minimum while the
penalized problem does not.
"""

import numpy as np

from lpcritpath import ProblemInstance, brute_force_global_P, main_path

inst = ProblemInstance.from_gram(np.eye(2), [2.0, 1.0], 0.7)
path = main_path(inst)
pts = path.points
cs = np.array([pt.c for pt in pts])
k = int(np.argmin(cs[: len(path.segments[0].points)]))
print(f"c at beta*: {cs[0]:.4f}, c-minimum {cs[k]:.4f} at {pts[k].beta.round(4)}")
for tp in path.segments[0].turning_points:
    print("lambda turning point at", tp.location.beta.round(4), f"lambda = {tp.location.lam:.5f}")

# from beta* to the c-minimum every point is a P local minimum
stretch = pts[: k + 1]
print("P classes up to the c-minimum:", sorted({pt.class_P for pt in stretch}))
q_non_min = sum(pt.class_Q != "local-min" for pt in stretch)
print(f"{q_non_min} of them are not Q local minima")

###############################################################################
# The global P oracle jumps between branches as c grows

for c in (2.20, 2.21, 2.22, 2.23):
    print(f"c = {c:.2f}: global P minimiser {brute_force_global_P(inst, c).beta.round(4)}")
