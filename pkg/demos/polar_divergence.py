"""
F keeps growing under refinement
================================

The polar cost -log(xy - 1) on {x > 0, xy > 1}.  Sampling the segment
{(x, 3 - 2x) : 3/4 <= x < 1} more and more finely drives the maximal inner
variation toward (3/2, 3/4) upward without bound, yet every finite level is
cycle free.
"""

from cpotential import variation_growth
from cpotential.costs import CostSpec, pt
from cpotential.worked import POLAR_END, POLAR_START, polar_family

LEVELS = 10

g = variation_growth(CostSpec("polar", {"region": "D1"}), polar_family(LEVELS), pt(*POLAR_START), pt(*POLAR_END))

print(f"{'points':>7}  {'F':>10}  cycle free")
for n, v, ok in zip(g.sizes, g.values, g.cycle_free):
    print(f"{n:7d}  {v:10.4f}  {ok}")

print("non-decreasing:", g.nondecreasing)
# each doubling adds about 2 log 2 = 1.386: a log-type blow-up
steps = [b - a for a, b in zip(g.values, g.values[1:])]
print("last increments:", [round(s, 4) for s in steps[-4:]])
