"""
The Coulomb cost and a one-way point
====================================

c(x, y) = 1 / |x - y| is finite off the diagonal.  Put one point at (2, 1)
and a row of points on the fiber [3, 4] x {2}.  A step from a fiber point
to (2, 1) would need c(2, 2) < inf, so walks only run out of (2, 1).
"""

import numpy as np

from cpotential import build_variation_graph, all_pairs_variation, condensation, construct_incremental
from cpotential.worked import coulomb_instance

inst = coulomb_instance(step=0.25)
g = build_variation_graph(inst)
F = all_pairs_variation(g)

print(F.to_text())
print("path bounded:", F.path_bounded, " cyclically monotone:", F.cyclically_monotone)

# the fiber behaves like the potential difference of 1/(x - 2)
xs = np.array([p.x[0] for p in inst.points[1:]])
closed = 1 / (xs[:, None] - 2) - 1 / (xs[None, :] - 2)
print("max deviation on the fiber:", np.max(np.abs(F.values[1:, 1:] - closed)))

# nothing on the fiber reaches (2, 1)
print("F(fiber, (2,1)):", set(F.values[1:, 0].tolist()))

# one source component and one fiber component
cond = condensation(g)
print("components:", cond.members)

f = construct_incremental(F)
for p, v in zip(inst.points, f.values):
    print(f"  f{p.as_tuple()} = {v:+.6f}")
