"""
Greedy critical paths and OMP
=============================

The greedy path starts at the origin and adds one coordinate per
breakpoint, picking the largest gradient.  Its breakpoints coincide with
the steps of orthogonal matching pursuit.  The modified variant only admits
coordinates whose gradient opposes the sign of the OLS solution.
"""

import numpy as np

from lpcritpath import ProblemInstance, check_omp_coincidence, greedy_path, omp

G = np.array([[1, -0.7, -0.6], [-0.7, 1, -0.1], [-0.6, -0.1, 1]])
inst = ProblemInstance.from_gram(G, [0.2, 0.8, 1.0], 0.5)
print("gradient at the origin:", G @ inst.beta_star)

for modified in (False, True):
    path = greedy_path(inst, modified=modified)
    run = omp(inst, modified=modified)
    print(f"\nmodified={modified}: terminal {path.terminal.kind} at {path.endpoint.beta.round(4)}")
    for bp in path.breakpoints:
        print("  breakpoint", bp.beta.round(6))
    print("  OMP steps ", [s.round(6).tolist() for s in run.steps])
    if path.terminal.kind == "reached-OLS":
        print("  coincide:", check_omp_coincidence(path, run).passed)

###############################################################################
# The unmodified path enters coordinate 1 with the wrong sign; later both
# coordinates 1 and 2 vanish together and the path stalls at [0, 0, 0.8].
