"""Conjugate transforms and rectangle-sum monotonicity audits."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import Callable, Mapping, Sequence

import numpy as np

from .costs import CostSpec, PointPair, _vec, cost_matrix, eval_cost
from .extreal import POS_INF

log = logging.getLogger(__name__)


class ConjugateError(KeyError):
    """The function being conjugated is undefined at a sample point."""


@dataclass
class ConjugateResult:
    value: float
    slice_size: int

    @property
    def empty_slice(self) -> bool:
        return self.slice_size == 0


def conjugate_transform(spec: CostSpec, psi: Mapping | Callable, sample_X: Sequence, query_y,
                        mirrored: bool = False, detail: bool = False):
    """Infimum over the sample of ``c(x, y) - psi(x)``, restricted to ``c(x, y) < inf``.

    With ``mirrored=True`` the roles swap: ``sample_X`` holds y-values, ``query_y``
    is an x-value and the result is ``inf_y c(x, y) - psi(y)``.  An empty slice
    gives ``+inf`` and is logged; pass ``detail=True`` to get the slice size back.
    """
    if len(sample_X) == 0:
        raise ValueError("sample must be nonempty")
    keys = [_vec(s) for s in sample_X]
    q = _vec(query_y)
    vals = []
    for k in keys:
        try:
            vals.append(float(psi(k) if callable(psi) else _lookup(psi, k)))
        except KeyError as exc:
            raise ConjugateError(f"psi undefined at {k}") from exc
    if mirrored:
        costs = cost_matrix(spec, [q], keys)[0]
    else:
        costs = cost_matrix(spec, keys, [q])[:, 0]
    finite = np.isfinite(costs)
    n = int(finite.sum())
    if n == 0:
        log.warning("conjugate slice is empty at %s; returning +inf", q)
        out = POS_INF
    else:
        out = float(np.min(costs[finite] - np.asarray(vals)[finite]))
    return ConjugateResult(out, n) if detail else out


def _lookup(psi: Mapping, k: tuple):
    if k in psi:
        return psi[k]
    if len(k) == 1 and k[0] in psi:
        return psi[k[0]]
    raise KeyError(k)


# ------------------------------------------------------------- monotonicity

def oplus_le(p, q) -> bool:
    return p[0] <= q[0] and p[1] <= q[1]


def ominus_le(p, q) -> bool:
    return p[0] <= q[0] and p[1] >= q[1]


def strictly_oplus_comparable(p, q) -> bool:
    """Comparable under x-up/y-up with both coordinates differing."""
    return (p[0] - q[0]) * (p[1] - q[1]) > 0


def strictly_ominus_comparable(p, q) -> bool:
    return (p[0] - q[0]) * (p[1] - q[1]) < 0


def _xy(p) -> tuple[float, float]:
    if isinstance(p, PointPair):
        if p.dim != 1:
            raise ValueError("monotonicity audits need 2-coordinate points")
        return p.x[0], p.y[0]
    return float(p[0]), float(p[1])


def rectangle_sum(spec: CostSpec, s, e) -> float:
    """``c(xs,ys) - c(xe,ys) + c(xe,ye) - c(xs,ye)``; ``-inf`` when a cross corner leaves D."""
    xs, ys = _xy(s)
    xe, ye = _xy(e)
    a = eval_cost(spec, xs, ys)
    b = eval_cost(spec, xe, ys)
    c = eval_cost(spec, xe, ye)
    d = eval_cost(spec, xs, ye)
    if not (math.isfinite(a) and math.isfinite(c)):
        raise ValueError("rectangle sums are taken over probe pairs in D")
    if not (math.isfinite(b) and math.isfinite(d)):
        return -math.inf
    return a - b + c - d


@dataclass
class Witness:
    order: str
    s: tuple[float, float]
    e: tuple[float, float]
    rectangle_sum: float
    kind: str  # "comparability" or "corner-outside-domain"


@dataclass
class MonotonicityReport:
    consistent_ominus: bool
    consistent_oplus: bool
    witnesses: list = field(default_factory=list)
    sums: list = field(default_factory=list)
    skipped: int = 0

    def to_json(self) -> dict:
        return {
            "consistent_ominus": self.consistent_ominus,
            "consistent_oplus": self.consistent_oplus,
            "witnesses": [w.__dict__ for w in self.witnesses],
            "skipped": self.skipped,
        }


def monotonicity_audit(spec: CostSpec, probes: Sequence, tol: float = 1e-9) -> MonotonicityReport:
    """Check both monotonicity implications on probe pairs.

    A pair with rectangle sum ``<= tol`` must be comparable in the audited order.
    For the minus order that means it may not be strictly comparable in the plus
    order, and dually.  Probe pairs outside ``D`` are skipped and counted.
    """
    wit: list[Witness] = []
    sums = []
    skipped = 0
    for s, e in probes:
        s2, e2 = _xy(s), _xy(e)
        if not (math.isfinite(eval_cost(spec, *s2)) and math.isfinite(eval_cost(spec, *e2))):
            skipped += 1
            continue
        r = rectangle_sum(spec, s2, e2)
        sums.append(r)
        if r > tol:
            continue
        kind = "corner-outside-domain" if r == -math.inf else "comparability"
        if strictly_oplus_comparable(s2, e2):
            wit.append(Witness("ominus", s2, e2, r, kind))
        if strictly_ominus_comparable(s2, e2):
            wit.append(Witness("oplus", s2, e2, r, kind))
    return MonotonicityReport(
        consistent_ominus=not any(w.order == "ominus" for w in wit),
        consistent_oplus=not any(w.order == "oplus" for w in wit),
        witnesses=wit,
        sums=sums,
        skipped=skipped,
    )


@dataclass
class GridSignReport:
    sign_ominus: bool  # mixed partial > 0 everywhere probed
    sign_oplus: bool   # mixed partial < 0 everywhere probed
    values: np.ndarray


def mixed_partial_grid(spec: CostSpec, xs, ys, h: float = 1e-4) -> GridSignReport:
    """Central finite-difference estimate of the mixed partial on a grid.

    Grid nodes whose stencil leaves ``D`` get ``nan`` and are ignored by the verdicts.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    out = np.full((len(xs), len(ys)), np.nan)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            pp = eval_cost(spec, x + h, y + h)
            pm = eval_cost(spec, x + h, y - h)
            mp = eval_cost(spec, x - h, y + h)
            mm = eval_cost(spec, x - h, y - h)
            if all(map(math.isfinite, (pp, pm, mp, mm))):
                out[i, j] = (pp - pm - mp + mm) / (4 * h * h)
    vals = out[~np.isnan(out)]
    return GridSignReport(bool(np.all(vals > 0)), bool(np.all(vals < 0)), out)
