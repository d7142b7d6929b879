"""Builders for the worked instances used by demos, the CLI and the tests."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .chainext import SegmentComplex
from .costs import CostSpec, PointPair, eval_cost, pt
from .instance import Instance, Segment

# ------------------------------------------------------------- Coulomb

def coulomb_instance(step: float = 0.25, lo: float = 3.0, hi: float = 4.0) -> Instance:
    """The point (2, 1) plus a sample of the fiber [lo, hi] x {2}."""
    k = int(round((hi - lo) / step))
    xs = [lo + i * step for i in range(k + 1)]
    return Instance(CostSpec("coulomb"), [pt(2, 1)] + [pt(x, 2) for x in xs])


def coulomb_four() -> Instance:
    return Instance(CostSpec("coulomb"), [pt(2, 1), pt(3, 2), pt(3.5, 2), pt(4, 2)])


# ------------------------------------------------------------- polar

POLAR_START = (0.75, 1.5)
POLAR_END = (1.5, 0.75)


def polar_level(level: int) -> list[PointPair]:
    """Dyadic sample of {(x, 3 - 2x) : 3/4 <= x < 1} with 2**level points, plus the end point."""
    m = 2 ** level
    xs = [0.75 + k * 0.25 / m for k in range(m)]
    return [pt(x, 3 - 2 * x) for x in xs] + [pt(*POLAR_END)]


def polar_family(max_level: int = 12):
    return [polar_level(L) for L in range(max_level + 1)]


# ------------------------------------------------------------- diagonal

def diagonal_instance(k: int = 20) -> Instance:
    return Instance(CostSpec("halfline_diag"), [pt(i, i) for i in range(k)])


# ------------------------------------------------------------- disk toy

def disk_instance() -> Instance:
    return Instance(CostSpec("disk"), [pt(0, 0), pt(0.1, 0)])


# ------------------------------------------------------------- staircase segments for the example51 cost

@dataclass
class Ex51:
    eps: tuple[float, ...]
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    M: float
    samples: int

    @property
    def levels(self) -> int:
        return len(self.eps)

    def complex(self) -> SegmentComplex:
        segs = []
        for n in range(self.levels):
            e, a, b = self.eps[n], self.alpha[n], self.beta[n]
            segs.append(Segment((a, e), (b, e), self.samples, tags=frozenset({f"G1:{n}"})))
            segs.append(Segment((e, b), (e, a), self.samples, tags=frozenset({f"G2:{n}"})))
        return SegmentComplex([], segs, "ominus")

    def cost(self) -> CostSpec:
        return CostSpec("example51", {"region": "D1"})

    def instance(self) -> Instance:
        return self.complex().to_instance(self.cost())

    def admissible(self) -> bool:
        for n in range(self.levels):
            e = self.eps[n]
            nxt = self.eps[n + 1] if n + 1 < self.levels else e / 2
            top = min(1 / nxt, (self.M + 1) / e)
            if not (1 / e < self.alpha[n] < self.beta[n] < top):
                return False
        return True


def ex51(levels: int = 3, samples: int = 10, M: float = 4.0) -> Ex51:
    """Halving gaps with segments placed at 1.25/eps and 1.75/eps."""
    eps = tuple(2.0 ** -(n + 1) for n in range(levels))
    return Ex51(eps, tuple(1.25 / e for e in eps), tuple(1.75 / e for e in eps), M, samples)


def segment_label(p: PointPair) -> tuple[str, int] | None:
    for t in p.tags:
        if t.startswith("G1:") or t.startswith("G2:"):
            part, n = t.split(":")
            return part, int(n)
    return None


def ex51_walk_bound(ex: Ex51, start: tuple[str, int], end: tuple[str, int]) -> float:
    """Closed-form upper bound on walk sums between two segments of the family.

    ``start``/``end`` are (family, index) labels.  Returns ``-inf`` for pairs
    with no walk at all (first family to second family).
    """
    cost = ex.cost()
    e, a, b = ex.eps, ex.alpha, ex.beta

    def c(x, y):
        return eval_cost(cost, x, y)

    def g2_chain(n1, n2):
        return sum(c(e[n1 - j], a[n1 - j]) - c(e[n1 - j - 1], a[n1 - j]) for j in range(n1 - n2))

    (fs, ns), (fe, ne) = start, end
    if fs == "G2" and fe == "G2":
        if ns < ne:
            return -math.inf
        return g2_chain(ns, ne)
    if fs == "G1" and fe == "G1":
        if ns > ne:
            return -math.inf
        return (c(a[ns], e[ns]) - c(b[ns], e[ns])
                + sum(c(a[n], e[n]) - c(a[n + 1], e[n]) for n in range(ns, ne))
                + 2 * sum(c(a[n], e[n]) - c(b[n], e[n]) for n in range(ns, ne + 1)))
    if fs == "G2" and fe == "G1":
        return (c(e[0], a[0]) - c(a[0], a[0])
                + 2 * sum(c(e[ns - i], a[ns - i]) - c(e[ns - i - 1], a[ns - i]) for i in range(ns))
                + 4 * sum(c(a[n], e[n]) - c(b[n], e[n]) for n in range(ne + 1))
                + sum(c(a[n], e[n]) - c(a[n + 1], e[n]) for n in range(ne)))
    return -math.inf


def polar_chain(rng: np.random.Generator, k: int) -> list[PointPair]:
    """Random finite chain for the minus order inside {x > 0, xy > 1}."""
    xs = np.sort(rng.uniform(0.3, 4.0, k))
    offs = np.sort(rng.uniform(0.05, 3.0, k))[::-1]
    ys = 1.0 / xs + offs
    return [pt(float(x), float(y)) for x, y in zip(xs, ys)]


@dataclass
class BoundCheck:
    pairs: int
    worst_excess: float
    violations: list


def ex51_bound_check(ex: Ex51, inst: Instance | None = None, tol: float = 1e-9) -> BoundCheck:
    """Compare every enumerated walk sum against ``ex51_walk_bound`` for its segment labels.

    Walks are enumerated up to ``n - 1`` edges, which covers every simple path.
    """
    from .graph import build_variation_graph, walk_sums_from
    inst = ex.instance() if inst is None else inst
    g = build_variation_graph(inst)
    labels = [segment_label(p) for p in inst.points]
    cache: dict = {}
    worst, bad, count = -math.inf, [], 0
    for s in range(inst.n):
        sums = walk_sums_from(g, s, max(inst.n - 1, 0))
        for e in np.flatnonzero(np.isfinite(sums)):
            key = (labels[s], labels[e])
            if key not in cache:
                cache[key] = ex51_walk_bound(ex, *key)
            excess = float(sums[e]) - cache[key]
            count += 1
            worst = max(worst, excess)
            if excess > tol:
                bad.append((s, int(e), float(sums[e]), cache[key]))
    return BoundCheck(count, worst, bad)
