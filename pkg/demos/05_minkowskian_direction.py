"""
Steepest descent in the mixed pseudo-norm
=========================================

The generalized Minkowskian gradient measures active coordinates with the
Hessian ``K`` and inactive ones with the lp penalty.  At the origin it picks
a single coordinate; inside a segment with positive definite ``K`` it points
along the greedy path.
"""

import numpy as np

from lpcritpath import ProblemInstance, greedy_path, minkowskian_direction

G = np.array([[1, -0.7, -0.6], [-0.7, 1, -0.1], [-0.6, -0.1, 1]])
inst = ProblemInstance.from_gram(G, [0.2, 0.8, 1.0], 0.5)
for beta in (np.zeros(3), np.array([0.0, 0.0, 0.8]), inst.beta_star):
    d = minkowskian_direction(inst, beta)
    print(f"{beta.round(3)}: {d.regime:>11} {d.vector.round(6)}")

###############################################################################
# Along a greedy segment the regime switches once K turns positive definite

seg = greedy_path(inst, modified=True).segments[1]
for pt in seg.points[:: max(1, len(seg.points) // 8)]:
    print(f"lambda {pt.lam:.5f}: {minkowskian_direction(inst, pt.beta).regime}")
