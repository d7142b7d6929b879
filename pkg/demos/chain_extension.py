"""
Joining segments into a connected chain
=======================================

Six segments that hug the boundary of {xy > 1} in the staircase pattern
of the example51 cost.  Sampled, they are cyclically monotone but split into
six strong components, one per segment.  Joining consecutive segment ends by straight pieces
gives one strongly connected, still path bounded set, and an antiderivative
on it restricts to the original sample.
"""

from cpotential import extension_pipeline
from cpotential.worked import ex51, ex51_bound_check

ex = ex51(levels=3, samples=10)
print("gaps:", ex.eps, " admissible:", ex.admissible())

res = extension_pipeline(ex.complex(), ex.cost())
for st in res.stages:
    print(f"  [{'ok' if st.passed else 'FAIL'}] {st.name:>18}  {st.detail}")
print("connectors:")
for a, b in res.extension.connectors:
    print(f"  {a} -> {b}")
print("extension points:", res.extension_instance.n, " dropped:", len(res.dropped))

bc = ex51_bound_check(ex)
print(f"walk sums checked against the closed-form bound: {bc.pairs}, worst excess {bc.worst_excess:.3g}")
