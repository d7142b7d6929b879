"""Antiderivatives on finite instances and the potentials they induce.

An antiderivative is a real value ``f_i`` per node with
``c(x_i, y_i) - c(x_j, y_i) <= f_i - f_j`` for all ordered pairs (the left
side is ``-inf`` when there is no edge ``i -> j``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Callable, Mapping, Sequence

import numpy as np

from .costs import CostSpec, PointPair, _vec, cost_matrix
from .graph import Condensation, VariationGraph, build_variation_graph, condensation
from .instance import Instance
from .variation import VariationMatrix, all_pairs_variation

NEG_INF = -math.inf
POS_INF = math.inf

CONSTRUCTIONS = ("incremental", "sinks", "sources", "condensation_auto", "user_supplied")


class PotentialError(ValueError):
    pass


class NotPathBoundedError(PotentialError):
    def __init__(self, msg, pairs=()):
        super().__init__(msg)
        self.pairs = list(pairs)


class InconsistentBoundsError(PotentialError):
    """alpha > beta + tol during incremental construction."""


class BoundaryFailure(PotentialError):
    """A sinks/sources construction produced non-real values."""

    def __init__(self, msg, neg_inf_nodes=(), pos_inf_nodes=(), values=None):
        super().__init__(msg)
        self.neg_inf_nodes = list(neg_inf_nodes)
        self.pos_inf_nodes = list(pos_inf_nodes)
        self.values = values

    def to_json(self) -> dict:
        return {"error": str(self), "neg_inf_nodes": self.neg_inf_nodes, "pos_inf_nodes": self.pos_inf_nodes}


class FiberError(PotentialError):
    pass


class PartitionError(PotentialError):
    def __init__(self, msg, edge=None):
        super().__init__(msg)
        self.edge = edge


@dataclass
class Step:
    node: int
    alpha: float
    beta: float
    gamma: float


@dataclass
class Antiderivative:
    values: np.ndarray
    construction: str
    trace: list[Step] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.construction not in CONSTRUCTIONS:
            raise PotentialError(f"unknown construction {self.construction!r}")

    def __getitem__(self, i) -> float:
        return float(self.values[i])

    def __len__(self) -> int:
        return len(self.values)

    def shifted(self, c: float) -> "Antiderivative":
        return Antiderivative(self.values + c, self.construction, list(self.trace))

    def to_json(self) -> dict:
        return {
            "construction": self.construction,
            "values": {str(i): float(v) for i, v in enumerate(self.values)},
            "trace": [{"node": s.node, "alpha": _j(s.alpha), "beta": _j(s.beta), "gamma": s.gamma} for s in self.trace],
        }


def _j(v: float):
    from .extreal import format_ext
    return format_ext(v)


def _as_graph(obj) -> VariationGraph:
    if isinstance(obj, VariationGraph):
        return obj
    if isinstance(obj, Instance):
        return build_variation_graph(obj)
    raise TypeError(f"expected an Instance or VariationGraph, got {type(obj).__name__}")


def _require_bounded(matrix: VariationMatrix) -> None:
    if not matrix.path_bounded:
        pairs = matrix.infinite_pairs()
        raise NotPathBoundedError(f"instance is not path bounded ({len(pairs)} infinite entries)", pairs)


def pick_gamma(alpha: float, beta: float) -> float:
    """Deterministic choice in ``[alpha, beta]`` intersected with the reals."""
    if alpha == NEG_INF and beta == POS_INF:
        return 0.0
    if alpha == NEG_INF:
        return beta
    if beta == POS_INF:
        return alpha
    return 0.5 * (alpha + beta)


def construct_incremental(matrix: VariationMatrix, order: Sequence[int] | None = None,
                          tol: float | None = None) -> Antiderivative:
    """Insert nodes one at a time, keeping ``F(i, j) <= f_i - f_j`` on the processed prefix."""
    _require_bounded(matrix)
    tol = matrix.tolerance if tol is None else tol
    F = matrix.values
    n = matrix.n
    order = list(range(n)) if order is None else [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise PotentialError("order must be a permutation of the nodes")
    f = np.full(n, np.nan)
    done: list[int] = []
    trace = []
    for z in order:
        if not done:
            alpha, beta, gamma = NEG_INF, POS_INF, 0.0
        else:
            idx = np.asarray(done)
            alpha = float(np.max(F[z, idx] + f[idx]))
            beta = float(np.min(f[idx] - F[idx, z]))
            if alpha > beta + tol:
                raise InconsistentBoundsError(f"alpha={alpha} exceeds beta={beta} at node {z}")
            gamma = pick_gamma(alpha, beta)
        f[z] = gamma
        done.append(z)
        trace.append(Step(z, alpha, beta, gamma))
    return Antiderivative(f, "incremental", trace)


def select_terminals_auto(cond: Condensation) -> list[int]:
    """Lowest-index node of every strongly connected component."""
    return sorted(min(m) for m in cond.members)


def construct_from_boundary(matrix: VariationMatrix, direction: str, terminals: Sequence[int],
                            construction: str | None = None) -> Antiderivative:
    """``sinks``: ``f(p) = max_w F(p, w)``; ``sources``: ``f(p) = -max_a F(a, p)``."""
    terminals = sorted({int(t) for t in terminals})
    if not terminals:
        raise PotentialError("terminal set is empty")
    F = matrix.values
    if direction == "sinks":
        vals = np.max(F[:, terminals], axis=1)
    elif direction == "sources":
        vals = -np.max(F[terminals, :], axis=0)
    else:
        raise PotentialError(f"direction must be sinks or sources, not {direction!r}")
    neg = [int(i) for i in np.flatnonzero(vals == NEG_INF)]
    pos = [int(i) for i in np.flatnonzero(vals == POS_INF)]
    if neg or pos:
        parts = []
        if pos:
            parts.append(f"+inf at nodes {pos}")
        if neg:
            parts.append(f"-inf at nodes {neg}")
        raise BoundaryFailure(f"{direction} construction is not real-valued: " + "; ".join(parts), neg, pos, vals)
    return Antiderivative(vals, construction or direction)


def construct_auto(graph: VariationGraph, matrix: VariationMatrix) -> Antiderivative:
    """Sinks construction with one terminal per strongly connected component."""
    terms = select_terminals_auto(condensation(graph))
    return construct_from_boundary(matrix, "sinks", terms, "condensation_auto")


# ------------------------------------------------------------- verification

@dataclass
class VerifyReport:
    ok: bool
    worst_violation: float
    witness_pair: tuple[int, int] | None
    fiber_ok: bool = True
    fiber_witness: tuple[int, int] | None = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "worst_violation": self.worst_violation,
                "witness_pair": list(self.witness_pair) if self.witness_pair else None,
                "fiber_ok": self.fiber_ok,
                "fiber_witness": list(self.fiber_witness) if self.fiber_witness else None}


def verify_antiderivative(obj, f, tol: float | None = None) -> VerifyReport:
    """Check every ordered pair, plus equal values on shared x-fibers."""
    graph = _as_graph(obj)
    tol = graph.tolerance if tol is None else tol
    vals = np.asarray(f.values if isinstance(f, Antiderivative) else f, dtype=float)
    if len(vals) != graph.node_count:
        raise PotentialError("antiderivative must have one value per node")
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        return VerifyReport(False, POS_INF, (bad, bad))
    W = graph.weights  # W[i, j] = c(x_i,y_i) - c(x_j,y_i)
    slack = W - (vals[:, None] - vals[None, :])
    excess = np.where(np.isfinite(W), slack, NEG_INF)
    worst = float(np.max(excess))
    i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    ok = worst <= tol
    fiber_ok, fw = _fiber_check(graph.node_points, vals, tol)
    return VerifyReport(ok and fiber_ok, worst, None if ok else (int(i), int(j)), fiber_ok, fw)


def _fiber_check(points: Sequence[PointPair], vals, tol):
    seen: dict[tuple, int] = {}
    for i, p in enumerate(points):
        k = seen.setdefault(p.x, i)
        if abs(vals[k] - vals[i]) > tol:
            return False, (k, i)
    return True, None


def collapse_to_psi(obj, f, tol: float = 1e-9) -> dict[tuple, float]:
    """Map each distinct x to the common antiderivative value on its fiber."""
    points = obj.node_points if isinstance(obj, VariationGraph) else obj.points
    vals = np.asarray(f.values if isinstance(f, Antiderivative) else f, dtype=float)
    ok, w = _fiber_check(points, vals, tol)
    if not ok:
        raise FiberError(f"nodes {w[0]} and {w[1]} share x but carry different values")
    psi: dict[tuple, float] = {}
    for p, v in zip(points, vals):
        psi.setdefault(p.x, float(v))
    return psi


# ------------------------------------------------------------- potentials

class Potential:
    """``Psi(x) = min over (u, v) in G of c(x, v) - c(u, v) + psi(u)``."""

    def __init__(self, inst: Instance, psi: Mapping[tuple, float]):
        self.instance = inst
        self.psi = {(_vec(k)): float(v) for k, v in psi.items()}
        pts = inst.points
        self._V = np.array([p.y for p in pts], dtype=float)
        self._tags = [p.tags for p in pts]
        diag = inst.diagonal_costs()
        self._base = np.array([diag[i] - self.psi[p.x] for i, p in enumerate(pts)])

    def __call__(self, x) -> float:
        return float(self.evaluate([_vec(x)])[0])

    def evaluate(self, xs) -> np.ndarray:
        """Vectorised evaluation at many x-values."""
        M = cost_matrix(self.instance.cost, np.asarray(xs, dtype=float).reshape(len(xs), -1), self._V, self._tags)
        terms = M - self._base[None, :]
        return np.min(terms, axis=1)

    def to_json(self) -> dict:
        return {"psi": [{"x": list(k), "value": v} for k, v in self.psi.items()]}


def _psi_pair_check(inst: Instance, psi: Mapping[tuple, float], tol: float):
    """Largest violation of ``c(x,y) - c(u,y) <= psi(x) - psi(u)`` over G and P_X(G)."""
    xs = list(psi)
    pts = inst.points
    M = cost_matrix(inst.cost, np.array(xs, dtype=float), np.array([p.y for p in pts]), [p.tags for p in pts])
    diag = inst.diagonal_costs()
    pv = np.array([psi[k] for k in xs])
    own = np.array([psi[p.x] for p in pts])
    # lhs[g, u] = c(x_g, y_g) - c(u, y_g)
    lhs = diag[:, None] - M.T
    rhs = own[:, None] - pv[None, :]
    excess = np.where(np.isfinite(M.T), lhs - rhs, NEG_INF)
    worst = float(np.max(excess))
    g, u = np.unravel_index(int(np.argmax(excess)), excess.shape)
    return worst, (int(g), xs[u])


def extend_potential(inst: Instance, psi: Mapping, tol: float | None = None) -> Potential:
    tol = inst.tolerance if tol is None else tol
    psi = {(_vec(k)): float(v) for k, v in psi.items()}
    missing = [p.x for p in inst.points if p.x not in psi]
    if missing:
        raise PotentialError(f"psi is undefined at {missing[0]}")
    worst, wit = _psi_pair_check(inst, psi, tol)
    if worst > tol:
        raise PotentialError(f"psi violates the pair inequality by {worst:.3g} at point {wit[0]} against x={wit[1]}")
    pot = Potential(inst, psi)
    keys = list(psi)
    got = pot.evaluate(keys)
    for k, v in zip(keys, got):
        if not abs(v - psi[k]) <= tol:
            raise PotentialError(f"extension disagrees with psi at {k}: {v} vs {psi[k]}")  # pragma: no cover
    return pot


@dataclass
class SubdiffReport:
    ok: bool
    witnesses: list = field(default_factory=list)
    nonfinite: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "witnesses": self.witnesses, "nonfinite_probes": self.nonfinite}


def check_subdifferential(inst: Instance, pot: Potential, probe_grid=None, tol: float | None = None,
                          max_witnesses: int = 10) -> SubdiffReport:
    """Every G point must satisfy ``c(x,y) - c(z,y) <= Psi(x) - Psi(z)`` for probed z."""
    tol = inst.tolerance if tol is None else tol
    zs = list(pot.psi)
    if probe_grid is not None:
        zs += [_vec(z) for z in probe_grid]
    Z = np.array(zs, dtype=float)
    psi_z = pot.evaluate(zs)
    pts = inst.points
    X = np.array([p.x for p in pts])
    psi_x = pot.evaluate(X)
    diag = inst.diagonal_costs()
    wit = []
    bad_x = [i for i in range(len(pts)) if not math.isfinite(psi_x[i]) or not math.isfinite(diag[i])]
    for i in bad_x:
        wit.append({"point": i, "reason": "potential not finite at a G point"})
    Mz = cost_matrix(inst.cost, Z, np.array([p.y for p in pts]), [p.tags for p in pts])  # Mz[z, g]
    nonfinite = [list(zs[k]) for k in range(len(zs)) if not math.isfinite(psi_z[k])]
    for g in range(len(pts)):
        if g in bad_x:
            continue
        for k in range(len(zs)):
            if not math.isfinite(Mz[k, g]):
                continue  # left side is -inf
            lhs = diag[g] - Mz[k, g]
            rhs = psi_x[g] - psi_z[k]  # psi_z = +inf forces c(z, y) = +inf, handled above
            if lhs > rhs + tol:
                if len(wit) < max_witnesses:
                    wit.append({"point": g, "z": list(zs[k]), "excess": float(lhs - rhs)})
                else:
                    break
    return SubdiffReport(not wit, wit, nonfinite)


# ------------------------------------------------------------- gluing

def combine_components(obj, labels: Sequence, parts: Mapping) -> Antiderivative:
    """Glue per-part antiderivatives over a domain partition.

    ``parts[label]`` holds values for the nodes carrying that label, in node
    order.  The partition must not be crossed by any edge.
    """
    graph = _as_graph(obj)
    labels = list(labels)
    n = graph.node_count
    if len(labels) != n:
        raise PartitionError("one label per node is required")
    A = graph.adjacency
    lab = np.array([str(l) for l in labels])
    cross = A & (lab[:, None] != lab[None, :])
    if np.any(cross):
        i, j = (int(v) for v in np.argwhere(cross)[0])
        raise PartitionError(f"edge {i} -> {j} crosses parts {labels[i]!r} and {labels[j]!r}", (i, j))
    f = np.full(n, np.nan)
    for key in dict.fromkeys(labels):
        idx = [i for i in range(n) if labels[i] == key]
        if key not in parts:
            raise PartitionError(f"no antiderivative supplied for part {key!r}")
        v = parts[key]
        vals = np.asarray(v.values if isinstance(v, Antiderivative) else v, dtype=float)
        if len(vals) != len(idx):
            raise PartitionError(f"part {key!r} has {len(idx)} nodes but {len(vals)} values")
        f[idx] = vals
    return Antiderivative(f, "user_supplied")
