"""
Balls, chains of balls and a continuous extension
================================================
"""

import numpy as np

from cpotential import all_pairs_variation, ball_chain_components, build_variation_graph, construct_incremental
from cpotential.costs import pt
from cpotential.metric import continuity_extension
from cpotential.worked import coulomb_instance, disk_instance

disk = ball_chain_components(disk_instance())
print("disk toy:", disk.members, [r.value for r in disk.radii])

inst = coulomb_instance(0.1)
bs = ball_chain_components(inst)
print("Coulomb sample:", bs.members)

# values between the sample points come from the cost-difference squeeze
fine = coulomb_instance(0.01)
f = construct_incremental(all_pairs_variation(build_variation_graph(fine))).values
f = f + (1.0 - f[1])   # gauge: f = 1/(x - 2) on the fiber
for q in np.linspace(3.013, 3.987, 5):
    ext = continuity_extension(fine, f, pt(q, 2))
    print(f"  x = {q:.3f}: {ext.value:.9f}  vs 1/(x-2) = {1 / (q - 2):.9f}")
