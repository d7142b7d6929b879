"""Maximal balls, ball chains and continuity extension in the product metric.

Points ``(x, y)`` live in ``R^n x R^n`` with the Euclidean norm on the
concatenated vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Callable, Sequence

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .costs import CostSpec, PointPair, boundary_distance, cost_matrix, cost_pairs, eval_cost
from .instance import Instance

POS_INF = math.inf
RING_PROBES = 64


class MetricError(ValueError):
    pass


@dataclass
class Radius:
    value: float
    exact: bool

    def to_json(self) -> dict:
        from .extreal import format_ext
        return {"value": format_ext(self.value), "exact": self.exact}


def _ring_directions(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit directions in ``R^(2*dim)``: an even circle for the plane, random otherwise."""
    if dim == 1:
        t = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    v = rng.standard_normal((count, 2 * dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


_RING_FRACTIONS = np.arange(1, 9) / 8.0


def _rings_inside(cost: CostSpec, center: np.ndarray, r: float, dirs: np.ndarray) -> bool:
    """All probes on the rings of radius ``r/8, 2r/8, ..., r`` lie in ``D``."""
    pts = center[None, None, :] + r * _RING_FRACTIONS[:, None, None] * dirs[None, :, :]
    pts = pts.reshape(-1, len(center))
    n = len(center) // 2
    return bool(np.all(np.isfinite(cost_pairs(cost, pts[:, :n], pts[:, n:]))))


def maximal_ball_radius(cost: CostSpec, p: PointPair, probes: int = RING_PROBES, iters: int = 40,
                        cap: float = 1e6, seed: int = 0) -> Radius:
    """Largest open ball around ``p`` inside the domain.

    Exact when the cost has a closed-form boundary distance.  Otherwise the
    radius is bisected against rings of probes, and every ring at or below the
    returned value (checked at 8 radii) has all probes inside ``D``; the
    value is flagged approximate.
    """
    if not cost.domain_open:
        raise MetricError(f"the {cost.kind} cost does not have an open domain")
    if not math.isfinite(eval_cost(cost, p)):
        raise MetricError(f"{p.x}x{p.y} is outside the domain")
    bd = boundary_distance(cost, p)
    if bd is not None:
        return Radius(bd, True)
    center = np.array(p.x + p.y, dtype=float)
    dirs = _ring_directions(p.dim, probes, np.random.default_rng(seed))

    def ok(r):
        return _rings_inside(cost, center, r, dirs)

    hi = 1.0
    while ok(hi):
        hi *= 2.0
        if hi > cap:
            return Radius(POS_INF, False)
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return Radius(lo, False)


def product_distance(p: PointPair, q: PointPair) -> float:
    return math.dist(p.as_tuple(), q.as_tuple())


@dataclass
class BallStructure:
    radii: list[Radius]
    component_id: np.ndarray
    members: list[list[int]] = field(default_factory=list)

    @property
    def connected(self) -> bool:
        return len(self.members) <= 1

    def to_json(self) -> dict:
        return {"radii": [r.to_json() for r in self.radii], "component_id": self.component_id.tolist(),
                "members": self.members}


def ball_chain_components(inst: Instance, radii: Sequence[Radius] | None = None,
                          tol: float | None = None) -> BallStructure:
    """Join ``p`` and ``q`` when some instance point lies strictly inside both maximal balls."""
    tol = inst.tolerance if tol is None else tol
    if radii is None:
        radii = [maximal_ball_radius(inst.cost, p) for p in inst.points]
    rho = np.array([r.value for r in radii], dtype=float)
    P = np.array([p.as_tuple() for p in inst.points])
    D = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))
    inside = D < (rho[None, :] - tol)  # inside[r, p]: r lies in the ball around p
    ds = DisjointSet(range(inst.n))
    for r in range(inst.n):
        hits = np.flatnonzero(inside[r])
        for a in hits[1:]:
            ds.merge(int(hits[0]), int(a))
    roots: dict[int, int] = {}
    lab = np.zeros(inst.n, dtype=int)
    for i in range(inst.n):
        lab[i] = roots.setdefault(ds[i], len(roots))
    members = [[] for _ in roots]
    for i, c in enumerate(lab):
        members[c].append(i)
    return BallStructure(list(radii), lab, members)


# ------------------------------------------------------------- continuity

class ContinuityError(MetricError):
    pass


@dataclass
class Extension:
    value: float
    lower: float
    upper: float
    tail_bound: float
    sequence: list[int]


def nearest_selector(inst: Instance, q: PointPair, k: int = 8) -> list[int]:
    """The ``k`` instance points closest to ``q``, farthest first."""
    d = [product_distance(p, q) for p in inst.points]
    idx = sorted(range(inst.n), key=lambda i: d[i])[:k]
    return idx[::-1]


def continuity_extension(inst: Instance, f, query: PointPair,
                         selector: Callable[[Instance, PointPair], Sequence[int]] = nearest_selector,
                         cauchy_tol: float = 0.05, tol: float | None = None) -> Extension:
    """Value at ``query`` of the continuous extension of an antiderivative.

    The selected sequence must approach ``query`` and its tail must be Cauchy
    under the cost-difference estimate
    ``|f(p) - f(q)| <= max(|c(x_p,y_p) - c(x_q,y_p)|, |c(x_q,y_q) - c(x_p,y_q)|)``.
    Every admissible value is squeezed by the pair inequalities against all
    nodes; the last sequence value is projected into that interval.
    """
    cost = inst.cost
    tol = inst.tolerance if tol is None else tol
    if not (cost.domain_open and cost.continuous):
        raise ContinuityError(f"continuity extension needs a continuous cost on an open domain; {cost.kind} is not")
    if not math.isfinite(eval_cost(cost, query)):
        raise ContinuityError("query point is outside the domain")
    vals = np.asarray(getattr(f, "values", f), dtype=float)
    seq = list(selector(inst, query))
    if not seq:
        raise ContinuityError("selector returned no points")
    pts = inst.points
    for i in seq:
        if pts[i].as_tuple() == query.as_tuple():
            v = float(vals[i])
            return Extension(v, v, v, 0.0, [i])
    dists = [product_distance(pts[i], query) for i in seq]
    if any(b > a + 1e-15 for a, b in zip(dists, dists[1:])):
        raise ContinuityError("selected sequence does not approach the query")

    def gap(i, j):
        a, b = pts[i], pts[j]
        d1 = eval_cost(cost, a.x, a.y, a.tags) - eval_cost(cost, b.x, a.y, a.tags)
        d2 = eval_cost(cost, b.x, b.y, b.tags) - eval_cost(cost, a.x, b.y, b.tags)
        return max(abs(d1), abs(d2))

    tail = seq[len(seq) // 2:] if len(seq) > 1 else seq
    tail_bound = max((gap(a, b) for a, b in zip(tail, tail[1:])), default=0.0)
    for a, b in zip(tail, tail[1:]):
        if abs(vals[a] - vals[b]) > gap(a, b) + tol:
            raise ContinuityError(f"values at nodes {a}, {b} violate the cost-difference estimate")
    if not math.isfinite(tail_bound) or tail_bound > cauchy_tol:
        raise ContinuityError(f"tail is not Cauchy within {cauchy_tol} (bound {tail_bound:.3g})")
    # sandwich: c(xq,yq) - c(xn,yq) <= F(q) - f_n  and  c(xn,yn) - c(xq,yn) <= f_n - F(q)
    X = np.array([p.x for p in pts])
    Y = np.array([p.y for p in pts])
    tags = [p.tags for p in pts]
    c_q_yn = cost_matrix(cost, [query.x], Y, tags)[0]
    c_n_yq = cost_matrix(cost, X, [query.y], [query.tags])[:, 0]
    c_qq = eval_cost(cost, query)
    diag = inst.diagonal_costs()
    lo_terms = np.where(np.isfinite(c_n_yq), vals + c_qq - c_n_yq, -POS_INF)
    hi_terms = np.where(np.isfinite(c_q_yn), vals - diag + c_q_yn, POS_INF)
    lower, upper = float(np.max(lo_terms)), float(np.min(hi_terms))
    if lower > upper + tol:
        raise ContinuityError(f"no consistent value: lower {lower} > upper {upper}")
    v = min(max(float(vals[seq[-1]]), lower), upper)
    return Extension(v, lower, upper, tail_bound, seq)
