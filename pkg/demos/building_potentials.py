"""
Three ways to build an antiderivative, and one that fails
=========================================================
"""

from cpotential import (all_pairs_variation, build_variation_graph, collapse_to_psi, construct_from_boundary,
                        construct_incremental, extend_potential, verify_antiderivative)
from cpotential.potentials import BoundaryFailure
from cpotential.worked import coulomb_four, diagonal_instance

inst = coulomb_four()
g = build_variation_graph(inst)
F = all_pairs_variation(g)

# incremental: each new node gets a value between the two bounds from the nodes already placed
f = construct_incremental(F)
for s in f.trace:
    print(f"node {s.node}: alpha={s.alpha:+.4f} beta={s.beta:+.4f} -> {s.gamma:+.4f}")
print(verify_antiderivative(g, f))

# sinks and sources: distances to or from a terminal set
print("sinks {0,3}:  ", construct_from_boundary(F, "sinks", [0, 3]).values)
print("sources {0}:  ", construct_from_boundary(F, "sources", [0]).values)

# the potential on the x axis, read off the instance
psi = collapse_to_psi(inst, f)
pot = extend_potential(inst, psi)
for x in (2.0, 2.5, 3.0, 3.75, 4.0):
    print(f"  Psi({x}) = {pot(x):+.6f}")

# diagonal cost: only rightward moves are allowed, so a single sink in the
# middle cannot see the points to its right
d = diagonal_instance(12)
try:
    construct_from_boundary(all_pairs_variation(build_variation_graph(d)), "sinks", [5])
except BoundaryFailure as exc:
    print("sinks {5} failed;", exc.to_json())
