"""
Critical points of an orthogonal problem
========================================

When ``G = I`` the objective separates.  Each coordinate contributes a zero
branch (C), a nonzero local max (B) and a nonzero local min (A), so a
two-coordinate problem has up to nine critical points.
"""

from lpcritpath import ProblemInstance, classify_Q, enumerate_orthogonal_critical_points

inst = ProblemInstance.from_gram([[1.0, 0.0], [0.0, 1.0]], [2.0, 1.0], 0.5)
lam = 0.05
for pt in enumerate_orthogonal_critical_points(inst, lam):
    tag = classify_Q(inst, pt.beta, lam).tag
    print("".join(pt.labels), f"{tag:>10}", pt.beta.round(6))

###############################################################################
# BB is the only local max; every combination with exactly one B is a saddle
