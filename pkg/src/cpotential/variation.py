"""Maximal inner variation on finite instances.

``F(s, e)`` is the supremum over walks ``s -> e`` of the summed edge weights:
``-inf`` without a walk, ``+inf`` when a strictly positive cycle sits on some
walk, otherwise the best simple path.  The empty walk is admitted, so
``F(s, s) >= 0`` always.

Relaxation runs Bellman-Ford sweeps in node order, updating in place.  An
update counts as an improvement only when it beats the old value by more than
``tol / k`` (``k`` relevant nodes): a cycle heavier than ``tol`` forces such an
improvement in the detection round, while improvements below it cannot add up
to more than ``tol`` overall.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Iterable, Sequence

import numpy as np

from .costs import CostSpec, PointPair
from .extreal import format_ext
from .graph import VariationGraph, build_variation_graph
from .instance import Instance

NEG_INF = -math.inf
POS_INF = math.inf


def _sweep(inc: np.ndarray, dist: np.ndarray, pred: np.ndarray | None = None) -> np.ndarray:
    """One in-place relaxation pass; returns the improvement at each node."""
    k = len(dist)
    gain = np.zeros(k)
    for j in range(k):
        cand = dist + inc[j]
        best = cand.max()
        if best > dist[j]:
            gain[j] = POS_INF if dist[j] == NEG_INF else best - dist[j]
            dist[j] = best
            if pred is not None:
                pred[j] = int(np.argmax(cand))
    return gain


def _relax(inc: np.ndarray, dist: np.ndarray, tol: float, pred=None) -> np.ndarray:
    """Run up to ``k - 1`` sweeps plus one detection sweep.

    Returns the boolean mask of nodes that still improved significantly in the
    detection sweep (empty when no positive cycle is reachable).
    """
    k = len(dist)
    delta = tol / max(k, 1)
    for _ in range(max(k - 1, 0)):
        gain = _sweep(inc, dist, pred)
        if not np.any(gain > delta):
            return np.zeros(k, dtype=bool)
    return _sweep(inc, dist, pred) > delta


def max_inner_variation(graph: VariationGraph, s: int, e: int, tol: float | None = None) -> float:
    tol = graph.tolerance if tol is None else tol
    reach = graph.reachable_from(s)
    if not reach[e]:
        return NEG_INF
    rel = np.flatnonzero(reach & graph.coreachable_to(e))
    pos = {int(v): a for a, v in enumerate(rel)}
    inc = graph.incoming[np.ix_(rel, rel)]
    dist = np.full(len(rel), NEG_INF)
    dist[pos[s]] = 0.0
    if np.any(_relax(inc, dist, tol)):
        return POS_INF
    out = float(dist[pos[e]])
    if s == e:
        return 0.0  # finite F(s, s) means no positive cycle through s
    return out


@dataclass
class VariationMatrix:
    values: np.ndarray
    tolerance: float = 1e-9

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def path_bounded(self) -> bool:
        return not bool(np.any(self.values == POS_INF))

    @property
    def cyclically_monotone(self) -> bool:
        return bool(np.all(np.diag(self.values) == 0.0))

    def __getitem__(self, key) -> float:
        return float(self.values[key])

    def infinite_pairs(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in zip(*np.nonzero(self.values == POS_INF))]

    def to_json(self) -> dict:
        return {
            "F": [[format_ext(float(v)) for v in row] for row in self.values],
            "path_bounded": self.path_bounded,
            "cyclically_monotone": self.cyclically_monotone,
        }

    def to_text(self, digits: int = 6) -> str:
        def cell(v):
            if v == POS_INF:
                return "+inf"
            if v == NEG_INF:
                return "-inf"
            return f"{v:.{digits}g}"
        cells = [[cell(float(v)) for v in row] for row in self.values]
        width = max([4] + [len(c) for row in cells for c in row])
        head = "     " + " ".join(f"{j:>{width}}" for j in range(self.n))
        rows = [f"{i:>4} " + " ".join(f"{c:>{width}}" for c in row) for i, row in enumerate(cells)]
        return "\n".join([head] + rows)


def all_pairs_variation(graph: VariationGraph, tol: float | None = None) -> VariationMatrix:
    """All ``F(s, e)`` by a max-plus Floyd-Warshall closure.

    A node ``k`` whose closed value ``D[k, k]`` exceeds ``tol`` lies on a
    positive cycle, and every pair ``(s, e)`` with ``s -> k -> e`` gets
    ``+inf``.  Other entries are best simple-path weights, matching
    ``max_inner_variation`` pair by pair.
    """
    tol = graph.tolerance if tol is None else tol
    n = graph.node_count
    D = np.array(graph.weights, dtype=float)
    np.fill_diagonal(D, 0.0)
    for k in range(n):
        np.maximum(D, D[:, k:k + 1] + D[k:k + 1, :], out=D)
        np.minimum(D, _CLIP, out=D)  # positive cycles compound; keep values finite
    hot = np.flatnonzero(np.diag(D) > tol)
    if len(hot):
        R = np.isfinite(D)
        tainted = (R[:, hot].astype(np.int64) @ R[hot, :].astype(np.int64)) > 0
        D[tainted] = POS_INF
    diag = np.diag(D).copy()
    diag[diag != POS_INF] = 0.0
    np.fill_diagonal(D, diag)
    return VariationMatrix(D, tol)


_CLIP = 1e200


def variation_matrix(inst: Instance) -> VariationMatrix:
    return all_pairs_variation(build_variation_graph(inst))


# ------------------------------------------------------------- cycle checks

@dataclass
class CycleCheck:
    positive_cycle: bool
    cycle: list[int] = field(default_factory=list)
    weight: float = 0.0


def find_positive_cycle(graph: VariationGraph, tol: float | None = None) -> CycleCheck:
    """Global test for a cycle with weight above ``tol``, with a witness cycle.

    Every node starts at 0, as if a virtual source stepped into each of them.
    """
    tol = graph.tolerance if tol is None else tol
    n = graph.node_count
    inc = graph.incoming
    dist = np.zeros(n)
    pred = np.arange(n)
    bad = _relax(inc, dist, tol, pred)
    if not np.any(bad):
        return CycleCheck(False)
    v = int(np.flatnonzero(bad)[0])
    for _ in range(n):
        v = int(pred[v])
    cyc = [v]
    u = int(pred[v])
    while u != v and len(cyc) <= n:
        cyc.append(u)
        u = int(pred[u])
    cyc.reverse()
    weight = cycle_weight(graph, cyc)
    if not weight > tol:
        # predecessor walk landed on a zero-weight loop; fall back to the best 2-cycle
        W = graph.weights
        two = W + W.T
        np.fill_diagonal(two, NEG_INF)
        a, b = np.unravel_index(int(np.argmax(two)), two.shape)
        if two[a, b] > tol:
            cyc, weight = [int(a), int(b)], float(two[a, b])
    return CycleCheck(True, cyc, weight)


def cycle_weight(graph: VariationGraph, cyc: Sequence[int]) -> float:
    total = 0.0
    for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
        if a == b:
            continue
        w = graph.weight(a, b)
        if w == NEG_INF:
            return NEG_INF
        total += w
    return total


# ------------------------------------------------------------- refinement

@dataclass
class GrowthResult:
    values: list[float]
    sizes: list[int]
    cycle_free: list[bool]

    @property
    def nondecreasing(self) -> bool:
        return all(b >= a for a, b in zip(self.values, self.values[1:]))

    @property
    def strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.values, self.values[1:]))


class RefinementError(ValueError):
    pass


def variation_growth(cost: CostSpec, family: Iterable[Sequence[PointPair]], s_point: PointPair,
                     e_point: PointPair, tol: float = 1e-9, check_cycles: bool = True) -> GrowthResult:
    """``F(s, e)`` on each level of a nested family of point sets."""
    values, sizes, cyc = [], [], []
    prev_keys: set | None = None
    for level, pts in enumerate(family):
        pts = list(pts)
        keys = [p.as_tuple() for p in pts]
        kset = set(keys)
        if prev_keys is not None and not prev_keys <= kset:
            raise RefinementError(f"level {level} is not a superset of level {level - 1}")
        try:
            s = keys.index(s_point.as_tuple())
            e = keys.index(e_point.as_tuple())
        except ValueError as exc:
            raise RefinementError(f"start or end point missing from level {level}") from exc
        graph = build_variation_graph(Instance(cost, pts, tol))
        values.append(max_inner_variation(graph, s, e, tol))
        sizes.append(len(pts))
        if check_cycles:
            cyc.append(not find_positive_cycle(graph, tol).positive_cycle)
        del graph
        prev_keys = kset
    return GrowthResult(values, sizes, cyc)
