"""Planar orders, chain extensions and the extension pipeline.

Two orders on the plane:

* ``oplus``:  ``(x, y) <= (u, v)`` iff ``x <= u`` and ``y <= v``;
* ``ominus``: ``(x, y) <= (u, v)`` iff ``x <= u`` and ``y >= v``.

A closed planar set is represented by *pieces*: isolated points and straight
segments, each oriented so that it runs upward in the declared order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Sequence

import numpy as np

from .audit import monotonicity_audit
from .costs import CostSpec, PointPair, cost_pairs, eval_cost, in_domain
from .graph import build_variation_graph, condensation, semi_connectivity
from .instance import Instance, Segment
from .metric import maximal_ball_radius, MetricError
from .potentials import Antiderivative, construct_incremental, verify_antiderivative
from .variation import all_pairs_variation, find_positive_cycle

ORDERS = ("ominus", "oplus")
Pt = tuple[float, float]


def leq(order: str, p: Pt, q: Pt) -> bool:
    if order == "ominus":
        return p[0] <= q[0] and p[1] >= q[1]
    if order == "oplus":
        return p[0] <= q[0] and p[1] <= q[1]
    raise ValueError(f"unknown order {order!r}")


def comparable(order: str, p: Pt, q: Pt) -> bool:
    return leq(order, p, q) or leq(order, q, p)


def _sort_key(order: str):
    if order == "ominus":
        return lambda p: (p[0], -p[1])
    return lambda p: (p[0], p[1])


def _xy(p) -> Pt:
    if isinstance(p, PointPair):
        return (p.x[0], p.y[0])
    return (float(p[0]), float(p[1]))


@dataclass
class ChainCheck:
    chain: bool
    sorted_indices: list[int] | None = None
    violating_pair: tuple[int, int] | None = None


def is_chain(points: Sequence, order: str) -> ChainCheck:
    """Sort along the order and check comparability of consecutive entries.

    Comparisons are exact.  Consecutive comparability is enough because the
    sort key makes any comparable pair appear in its order.
    """
    pts = [_xy(p) for p in points]
    idx = sorted(range(len(pts)), key=lambda i: _sort_key(order)(pts[i]))
    for a, b in zip(idx, idx[1:]):
        if not leq(order, pts[a], pts[b]):
            return ChainCheck(False, None, (a, b))
    return ChainCheck(True, idx, None)


# ------------------------------------------------------------- complexes

@dataclass
class SegmentComplex:
    points: list[Pt] = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list)
    order: str = "ominus"

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"unknown order {self.order!r}")
        self.points = [_xy(p) for p in self.points]

    def samples(self) -> list[PointPair]:
        out = [PointPair((x,), (y,)) for x, y in self.points]
        for s in self.segments:
            out.extend(s.sample())
        return out

    def pieces(self) -> list[tuple[Pt, Pt]]:
        """Closure pieces, each oriented upward in the order."""
        out = [(p, p) for p in self.points]
        for s in self.segments:
            a, b = s.a, s.b
            if leq(self.order, b, a) and not leq(self.order, a, b):
                a, b = b, a
            out.append((a, b))
        return out

    def to_instance(self, cost: CostSpec, tolerance: float = 1e-9, seed: int = 0) -> Instance:
        return Instance(cost, [PointPair((x,), (y,)) for x, y in self.points], tolerance, seed, list(self.segments))


class NotAChainError(ValueError):
    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


def _sorted_pieces(order: str, pieces: Sequence[tuple[Pt, Pt]]):
    for a, b in pieces:
        if not leq(order, a, b):
            raise NotAChainError(f"segment {a}-{b} is not monotone in the {order} order", (a, b))
    key = _sort_key(order)
    ps = sorted(pieces, key=lambda ab: (key(ab[0]), key(ab[1])))
    for (a0, b0), (a1, b1) in zip(ps, ps[1:]):
        if not leq(order, b0, a1):
            raise NotAChainError(f"pieces ending at {b0} and starting at {a1} interleave", (b0, a1))
    return ps


def _param_at_least(a: float, b: float, target: float, up: bool) -> float:
    """Smallest ``t`` in [0, inf] with ``a + t (b - a)`` >= target (or <= when not ``up``)."""
    if not up:
        a, b, target = -a, -b, -target
    if a >= target:
        return 0.0
    if b <= a:
        return math.inf
    return (target - a) / (b - a)


def predecessor_profile(order: str, pieces: Sequence[tuple[Pt, Pt]], p: Pt) -> Pt:
    """``(L, U)`` of ``p`` from the elements of the pieces not above ``p``.

    ``L`` is the supremum of their x-coordinates; ``U`` is the infimum (minus
    order) or supremum (plus order) of their y-coordinates.  Without such
    elements the profile is ``p`` itself.
    """
    Ls, Us = [], []
    y_up = order == "oplus"
    for a, b in pieces:
        # elements above p form the parameter interval [t*, 1]; the rest is [0, t*)
        tx = _param_at_least(a[0], b[0], p[0], True)
        ty = _param_at_least(a[1], b[1], p[1], y_up)
        t = max(tx, ty)
        if t <= 0.0:
            continue
        t = min(t, 1.0)
        q = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])) if t < 1.0 else b
        Ls.append(q[0])
        Us.append(q[1])
    if not Ls:
        return p
    return (max(Ls), max(Us) if y_up else min(Us))


@dataclass
class ChainExtension:
    order: str
    elements: list[Pt]
    profiles: list[Pt]
    connectors: list[tuple[Pt, Pt]]
    pieces: list[tuple[Pt, Pt]]

    @property
    def polyline(self) -> list[Pt]:
        verts: list[Pt] = []
        for a, b in self.pieces:
            for v in (a, b):
                if not verts or verts[-1] != v:
                    verts.append(v)
        return verts

    def all_segments(self) -> list[tuple[Pt, Pt]]:
        """Pieces and connectors, sorted along the order."""
        segs = list(self.pieces) + list(self.connectors)
        key = _sort_key(self.order)
        return sorted(segs, key=lambda ab: (key(ab[0]), key(ab[1])))

    def contains(self, p: Pt, tol: float = 1e-9) -> bool:
        return any(_seg_dist(p, a, b) <= tol for a, b in self.all_segments())

    def minimum(self) -> Pt:
        return self.all_segments()[0][0]

    def maximum(self) -> Pt:
        return self.all_segments()[-1][1]

    def sample_connectors(self, density: float = 10.0) -> list[Pt]:
        """Interior points of each connector at ``density`` points per unit length."""
        out = []
        for a, b in self.connectors:
            length = math.dist(a, b)
            k = max(int(math.ceil(length * density)), 1)
            for i in range(1, k):
                t = i / k
                out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
        return out

    def sample(self, density: float = 10.0) -> list[Pt]:
        """Points spread over the whole extension, including all vertices."""
        out = []
        for a, b in self.all_segments():
            length = math.dist(a, b)
            k = max(int(math.ceil(length * density)), 1)
            out.extend((a[0] + i / k * (b[0] - a[0]), a[1] + i / k * (b[1] - a[1])) for i in range(k + 1))
        return out

    def to_json(self) -> dict:
        return {"order": self.order, "polyline": [list(v) for v in self.polyline],
                "connectors": [[list(a), list(b)] for a, b in self.connectors],
                "profiles": [list(v) for v in self.profiles]}


def _seg_dist(p: Pt, a: Pt, b: Pt) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    L2 = dx * dx + dy * dy
    t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2))
    return math.hypot(p[0] - ax - t * dx, p[1] - ay - t * dy)


def chain_extension(complex_: SegmentComplex) -> ChainExtension:
    """Join every element to the profile of its predecessors."""
    order = complex_.order
    pieces = _sorted_pieces(order, complex_.pieces())
    elements = [_xy(p) for p in complex_.samples()]
    chk = is_chain(elements, order)
    if not chk.chain:
        i, j = chk.violating_pair
        raise NotAChainError(f"elements {elements[i]} and {elements[j]} are incomparable", (elements[i], elements[j]))
    elements = [elements[i] for i in chk.sorted_indices]
    profiles = [predecessor_profile(order, pieces, e) for e in elements]
    connectors = []
    for a, _ in pieces:
        prof = predecessor_profile(order, pieces, a)
        if prof != a:
            connectors.append((prof, a))
    return ChainExtension(order, elements, profiles, connectors, pieces)


# ------------------------------------------------------------- pipeline

BLOWUP_THRESHOLD = 1e6


@dataclass
class Stage:
    name: str
    passed: bool
    detail: str = ""
    witness: object = None

    def to_json(self) -> dict:
        w = self.witness
        if isinstance(w, tuple):
            w = list(w)
        return {"hypothesis": self.name, "passed": self.passed, "status": "corroborated (sampled)" if self.passed else "failed",
                "detail": self.detail, "witness": w}


@dataclass
class PipelineResult:
    ok: bool
    stages: list[Stage]
    failing: str | None = None
    extension: ChainExtension | None = None
    extension_instance: Instance | None = None
    extension_antiderivative: Antiderivative | None = None
    antiderivative: Antiderivative | None = None
    dropped: list[Pt] = field(default_factory=list)
    condensation_count: int | None = None

    def stage(self, name: str) -> Stage:
        return next(s for s in self.stages if s.name == name)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "failing": self.failing,
            "stages": [s.to_json() for s in self.stages],
            "dropped_extension_points": [list(p) for p in self.dropped],
            "extension_components": self.condensation_count,
            "extension": self.extension.to_json() if self.extension else None,
            "antiderivative": self.antiderivative.to_json() if self.antiderivative else None,
        }


def _domain_samples(cost: CostSpec, pts: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1.0)
    lo, hi = lo - 0.25 * span, hi + 0.25 * span
    cand = rng.uniform(lo, hi, size=(count * 20, 2))
    vals = cost_pairs(cost, cand[:, :1], cand[:, 1:])
    inside = cand[np.isfinite(vals)][:count]
    return np.vstack([pts, inside])


def check_convexity(cost: CostSpec, pts: np.ndarray, rng, midpoints: int = 1000) -> Stage:
    dom = _domain_samples(cost, pts, rng, midpoints)
    i = rng.integers(0, len(dom), midpoints)
    j = rng.integers(0, len(dom), midpoints)
    t = rng.uniform(0, 1, midpoints)[:, None]
    mids = t * dom[i] + (1 - t) * dom[j]
    vals = cost_pairs(cost, mids[:, :1], mids[:, 1:])
    bad = np.flatnonzero(~np.isfinite(vals))
    if len(bad):
        k = int(bad[0])
        return Stage("i", False, "convex combination left the domain",
                     (tuple(dom[i[k]]), tuple(dom[j[k]]), tuple(mids[k])))
    return Stage("i", True, f"{midpoints} random convex combinations stayed in the domain")


def check_monotonicity(cost: CostSpec, pts: np.ndarray, order: str, rng, pairs: int = 1000, tol: float = 1e-9) -> Stage:
    dom = _domain_samples(cost, pts, rng, pairs)
    i = rng.integers(0, len(dom), pairs)
    j = rng.integers(0, len(dom), pairs)
    rep = monotonicity_audit(cost, [(tuple(dom[a]), tuple(dom[b])) for a, b in zip(i, j)], tol)
    ok = rep.consistent_ominus if order == "ominus" else rep.consistent_oplus
    wit = next((w for w in rep.witnesses if w.order == order), None)
    return Stage("ii", ok, f"{len(rep.sums)} rectangle sums audited for the {order} order",
                 None if wit is None else (wit.s, wit.e, wit.rectangle_sum))


def check_local_bounded(cost: CostSpec, samples: Sequence[PointPair], rng, max_points: int = 40) -> Stage:
    idx = np.arange(len(samples))
    if len(idx) > max_points:
        idx = rng.choice(idx, max_points, replace=False)
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    ring = np.stack([np.cos(t), np.sin(t)], axis=1)
    for k in idx:
        p = samples[int(k)]
        try:
            r = maximal_ball_radius(cost, p).value
        except MetricError as exc:
            return Stage("iii", False, str(exc), p.as_tuple())
        r = 1.0 if not math.isfinite(r) else 0.5 * r
        probes = np.array(p.as_tuple())[None, :] + np.concatenate([ring * r, ring * 0.5 * r])
        vals = cost_pairs(cost, probes[:, :1], probes[:, 1:])
        if not np.all(np.isfinite(vals)):
            return Stage("iii", False, "cost unbounded on a ball inside the domain", p.as_tuple())
    return Stage("iii", True, f"cost bounded on half-radius balls around {len(idx)} sampled points")


def _boundary_along(cost: CostSpec, p: np.ndarray, d: np.ndarray, reach: float):
    def inside(t):
        q = p + t * d
        return math.isfinite(eval_cost(cost, q[0], q[1]))
    ts = np.linspace(0, reach, 257)[1:]
    q = p[None, :] + ts[:, None] * d[None, :]
    outside = np.flatnonzero(~np.isfinite(cost_pairs(cost, q[:, :1], q[:, 1:])))
    if not len(outside):
        return None
    k = int(outside[0])
    lo, hi = (float(ts[k - 1]) if k else 0.0), float(ts[k])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return lo


def blows_up(values: Sequence[float]) -> bool:
    """Divergence certificate for a geometric approach sequence.

    Either some value passes the threshold, or the sequence increases strictly
    and its increments do not decay (the last is at least a quarter of the first),
    which is how log-type singularities look in double precision.
    """
    v = list(values)
    if any(x > BLOWUP_THRESHOLD for x in v):
        return True
    inc = [b - a for a, b in zip(v, v[1:])]
    return bool(inc) and all(d > 0 for d in inc) and inc[-1] >= 0.25 * inc[0]


def check_boundary_blowup(cost: CostSpec, samples: Sequence[PointPair], rng, directions: int = 8,
                          max_points: int = 12, steps: int = 30) -> Stage:
    pts = np.array([p.as_tuple() for p in samples])
    idx = rng.choice(len(pts), min(max_points, len(pts)), replace=False)
    span = float(np.max(pts.max(axis=0) - pts.min(axis=0))) + 1.0
    ang = np.linspace(0, 2 * np.pi, directions, endpoint=False)
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    found = 0
    for k in idx:
        p = pts[int(k)]
        for d in dirs:
            t = _boundary_along(cost, p, d, 2 * span)
            if t is None:
                continue
            found += 1
            seq = [eval_cost(cost, *(p + t * (1 - 2.0 ** -m) * d)) for m in range(1, steps + 1)]
            if not blows_up(seq):
                return Stage("iv", False, "cost stays bounded toward a boundary point", tuple(p + t * d))
    if not found:
        return Stage("iv", True, "no boundary point reached by the probe rays (vacuous)")
    return Stage("iv", True, f"cost diverges along {found} approach sequences")


def extension_pipeline(complex_: SegmentComplex, cost: CostSpec, density: float = 10.0, seed: int = 0,
                       tol: float = 1e-9, midpoints: int = 1000) -> PipelineResult:
    """Check the six hypotheses on samples, then build and use the extension."""
    rng = np.random.default_rng(seed)
    inst = complex_.to_instance(cost, tol, seed)
    samples = inst.points
    pts = np.array([p.as_tuple() for p in samples])
    stages = [
        check_convexity(cost, pts, rng, midpoints),
        check_monotonicity(cost, pts, complex_.order, rng, midpoints, tol),
        check_local_bounded(cost, samples, rng),
        check_boundary_blowup(cost, samples, rng),
    ]
    graph = build_variation_graph(inst)
    F = all_pairs_variation(graph)
    if F.path_bounded:
        stages.append(Stage("v", True, f"sampled set of {inst.n} points is path bounded"))
    else:
        cyc = find_positive_cycle(graph)
        stages.append(Stage("v", False, f"positive cycle of weight {cyc.weight:.6g}", cyc.cycle))
    semi = semi_connectivity(graph)
    stages.append(Stage("vi", semi.connected, f"{len(semi.blocks)} reachability block(s)",
                        None if semi.connected else semi.blocks))
    failing = next((s.name for s in stages if not s.passed), None)
    if failing is not None:
        return PipelineResult(False, stages, failing)

    try:
        ext = chain_extension(complex_)
    except NotAChainError as exc:
        stages.append(Stage("chain", False, str(exc), exc.pair))
        return PipelineResult(False, stages, "chain")
    extra, dropped = [], []
    for q in ext.sample_connectors(density):
        (extra if in_domain(cost, q[0], q[1]) else dropped).append(q)
    ext_inst = Instance(cost, list(samples) + [PointPair((x,), (y,)) for x, y in extra], tol, seed)
    eg = build_variation_graph(ext_inst)
    cond = condensation(eg)
    res = PipelineResult(False, stages, None, ext, ext_inst, dropped=dropped, condensation_count=cond.count)
    if cond.count != 1:
        stages.append(Stage("strong", False, f"{cond.count} components; raise the extension density", cond.members))
        res.failing = "strong"
        return res
    stages.append(Stage("strong", True, f"extension of {ext_inst.n} points is strongly connected"))
    EF = all_pairs_variation(eg)
    if not EF.path_bounded:
        cyc = find_positive_cycle(eg)
        stages.append(Stage("extension-bounded", False, "extension is not path bounded", cyc.cycle))
        res.failing = "extension-bounded"
        return res
    f_ext = construct_incremental(EF)
    v_ext = verify_antiderivative(eg, f_ext)
    restricted = Antiderivative(f_ext.values[: inst.n], "incremental")
    v_orig = verify_antiderivative(graph, restricted)
    stages.append(Stage("antiderivative", v_ext.ok and v_orig.ok,
                        f"worst violation {max(v_ext.worst_violation, v_orig.worst_violation):.3g}",
                        v_ext.witness_pair or v_orig.witness_pair))
    res.extension_antiderivative = f_ext
    res.antiderivative = restricted
    res.ok = all(s.passed for s in stages)
    res.failing = next((s.name for s in stages if not s.passed), None)
    return res
