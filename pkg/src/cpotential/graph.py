"""One-step transition digraph of a finite instance.

Node ``i`` has an edge to node ``j`` when the cross cost ``c(x_j, y_i)`` is
finite; its weight is ``c(x_i, y_i) - c(x_j, y_i)``.  Weights are stored as a
dense matrix ``incoming[j, i]`` (weight of ``i -> j``) with ``-inf`` marking a
missing edge, so row ``j`` lists everything that can step into ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .costs import PointPair
from .instance import Instance

NEG_INF = -math.inf
DEFAULT_BUDGET = 10_000_000


class BudgetExceeded(RuntimeError):
    """Walk enumeration needed more node expansions than allowed."""


@dataclass
class VariationGraph:
    node_points: list[PointPair]
    incoming: np.ndarray  # incoming[j, i] = w(i -> j), -inf when absent
    instance: Instance | None = None

    @property
    def node_count(self) -> int:
        return self.incoming.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """``weights[i, j] = w(i -> j)`` (a transposed view)."""
        return self.incoming.T

    @property
    def adjacency(self) -> np.ndarray:
        """Boolean ``adj[i, j]``: edge ``i -> j``."""
        return np.isfinite(self.weights)

    @property
    def tolerance(self) -> float:
        return self.instance.tolerance if self.instance is not None else 1e-9

    def weight(self, i: int, j: int) -> float:
        return float(self.incoming[j, i])

    def has_edge(self, i: int, j: int) -> bool:
        return bool(np.isfinite(self.incoming[j, i]))

    def successors(self, i: int) -> np.ndarray:
        return np.flatnonzero(np.isfinite(self.incoming[:, i]))

    def sparse(self) -> csr_matrix:
        return csr_matrix(self.adjacency.astype(np.int8))

    def reversed(self) -> "VariationGraph":
        """Same weights with every edge turned around."""
        return VariationGraph(self.node_points, np.ascontiguousarray(self.incoming.T), None)

    def reachable_from(self, s: int) -> np.ndarray:
        order = breadth_first_order(self.sparse(), s, directed=True, return_predecessors=False)
        mask = np.zeros(self.node_count, dtype=bool)
        mask[order] = True
        return mask

    def coreachable_to(self, e: int) -> np.ndarray:
        order = breadth_first_order(self.sparse().T.tocsr(), e, directed=True, return_predecessors=False)
        mask = np.zeros(self.node_count, dtype=bool)
        mask[order] = True
        return mask

    def reachability(self) -> np.ndarray:
        """``R[i, j]``: some walk (possibly empty) goes from ``i`` to ``j``."""
        cond = condensation(self)
        k = len(cond.members)
        comp_reach = np.eye(k, dtype=bool)
        succ = [[] for _ in range(k)]
        for a, b in cond.dag_edges:
            succ[a].append(b)
        for c in cond.topological_order()[::-1]:
            for b in succ[c]:
                comp_reach[c] |= comp_reach[b]
        lab = cond.component_id
        return comp_reach[np.ix_(lab, lab)]


def build_variation_graph(inst: Instance) -> VariationGraph:
    M = inst.cross_costs()  # M[a, b] = c(x_a, y_b)
    diag = np.diag(M).copy()
    with np.errstate(invalid="ignore"):
        inc = diag[None, :] - M  # inc[j, i] = c(x_i, y_i) - c(x_j, y_i)
    inc[~np.isfinite(M)] = NEG_INF
    np.fill_diagonal(inc, 0.0)
    return VariationGraph(list(inst.points), inc, inst)


def graph_from_weights(weights: np.ndarray, points: Sequence[PointPair] | None = None) -> VariationGraph:
    """Graph from an explicit ``weights[i, j]`` table (``-inf`` = no edge)."""
    W = np.array(weights, dtype=float)
    np.fill_diagonal(W, 0.0)
    pts = list(points) if points is not None else [PointPair((float(i),), (0.0,)) for i in range(W.shape[0])]
    return VariationGraph(pts, np.ascontiguousarray(W.T), None)


# ------------------------------------------------------------- condensation

@dataclass
class Condensation:
    component_id: np.ndarray
    members: list[list[int]]
    dag_edges: list[tuple[int, int]]

    @property
    def count(self) -> int:
        return len(self.members)

    def topological_order(self) -> list[int]:
        """Components ordered so every DAG edge points forward."""
        k = self.count
        indeg = [0] * k
        succ = [[] for _ in range(k)]
        for a, b in self.dag_edges:
            succ[a].append(b)
            indeg[b] += 1
        ready = sorted(c for c in range(k) if indeg[c] == 0)
        out = []
        while ready:
            c = ready.pop(0)
            out.append(c)
            for b in succ[c]:
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
        if len(out) != k:  # pragma: no cover - strong components always give a DAG
            raise RuntimeError("condensation is not acyclic")
        return out

    def to_dot(self) -> str:
        lines = ["digraph condensation {"]
        for c, mem in enumerate(self.members):
            label = ",".join(str(m) for m in mem)
            lines.append(f'  C{c} [label="{{{label}}}"];')
        for a, b in self.dag_edges:
            lines.append(f"  C{a} -> C{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"component_id": self.component_id.tolist(), "members": self.members,
                "dag_edges": [list(e) for e in self.dag_edges]}


def condensation(graph: VariationGraph) -> Condensation:
    n = graph.node_count
    _, raw = connected_components(graph.sparse(), directed=True, connection="strong")
    # relabel components by their lowest member so ids are deterministic
    first: dict[int, int] = {}
    for i, r in enumerate(raw):
        first.setdefault(int(r), len(first))
    lab = np.array([first[int(r)] for r in raw], dtype=int) if n else np.zeros(0, dtype=int)
    members = [[] for _ in range(len(first))]
    for i, c in enumerate(lab):
        members[c].append(i)
    src, dst = np.nonzero(graph.adjacency)
    edges = sorted({(int(lab[a]), int(lab[b])) for a, b in zip(src, dst) if lab[a] != lab[b]})
    return Condensation(lab, members, edges)


@dataclass
class SemiConnectivity:
    connected: bool
    blocks: list[list[int]]


def semi_connectivity(graph: VariationGraph) -> SemiConnectivity:
    """Blocks of the undirected 'one reaches the other' relation."""
    R = graph.reachability()
    und = csr_matrix((R | R.T).astype(np.int8))
    k, lab = connected_components(und, directed=False)
    blocks = [[] for _ in range(k)]
    for i, c in enumerate(lab):
        blocks[c].append(i)
    blocks.sort()
    return SemiConnectivity(k <= 1, blocks)


# ------------------------------------------------------------- walk oracle

def walk_sums_from(graph: VariationGraph, s: int, max_len: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Best weight sum of a walk ``s -> e`` with at most ``max_len`` edges, for every ``e``.

    Exhaustive max-plus dynamic program: layer ``t`` holds, for every node, the
    best sum of a walk from ``s`` using at most ``t`` edges, so every walk is
    accounted for.  Sums accumulate from the start of the walk, the same order
    a relaxation along the path uses.  Self edges are skipped since they add 0.
    Each edge relaxation counts against ``budget``.
    """
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    n = graph.node_count
    W = np.array(graph.weights, dtype=float)
    np.fill_diagonal(W, NEG_INF)
    per_layer = int(np.isfinite(W).sum()) + n
    if per_layer * max_len > budget:
        raise BudgetExceeded(f"walk enumeration needs {per_layer * max_len} expansions, budget {budget}")
    prev = np.full(n, NEG_INF)
    prev[s] = 0.0
    for _ in range(max_len):
        cur = np.maximum(prev, np.max(prev[:, None] + W, axis=0))
        if np.array_equal(cur, prev):
            break
        prev = cur
    return prev


def enumerate_walks(graph: VariationGraph, s: int, e: int, max_len: int,
                    budget: int = DEFAULT_BUDGET) -> float:
    """Best weight sum over walks ``s -> e`` with at most ``max_len`` edges (``-inf`` if none)."""
    return float(walk_sums_from(graph, s, max_len, budget)[e])


def walk_classification(graph: VariationGraph, tol: float | None = None, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """``F`` from walk enumeration alone, with ``+inf`` where a positive cycle can be pumped.

    A node whose best closed walk of at most ``n`` edges is positive lies on a
    positive cycle, and every node of a positive simple cycle is found this
    way.  ``(s, e)`` is ``+inf`` when such a node sits on some walk ``s -> e``;
    otherwise the best walk is a simple path and ``n - 1`` edges suffice.
    """
    tol = graph.tolerance if tol is None else tol
    n = graph.node_count
    W = np.array(graph.weights, dtype=float)
    np.fill_diagonal(W, NEG_INF)
    # closed walks at v with 1..n edges: step out of v, then at most n - 1 more
    short = np.array([walk_sums_from(graph, s, max(n - 1, 0), budget) for s in range(n)])
    closed = np.max(W + short.T, axis=1)  # closed[v] = max_u W[v,u] + short[u, v]
    hot = closed > tol
    reach = np.isfinite(short)
    out = short.copy()
    pumped = (reach[:, hot].astype(int) @ reach[hot, :].astype(int)) > 0
    out[pumped] = np.inf
    return out
