"""Random instance generators shared by the test modules."""

import numpy as np

from cpotential.costs import CostSpec, pt, tabulated
from cpotential.instance import Instance


def table_instance(rng, n, p_inf=0.3, scale=1.0, tol=1e-9):
    """Tabulated cost on ``x_i = y_i = i`` with random finite or infinite cross entries."""
    keys = list(range(n))
    M = rng.normal(0.0, scale, (n, n))
    M[rng.random((n, n)) < p_inf] = np.inf
    np.fill_diagonal(M, rng.normal(0.0, scale, n))
    return Instance(tabulated(keys, keys, M), [pt(i, i) for i in keys], tol)


def monotone_table_instance(rng, n, p_inf=0.3, tol=1e-9, ties=0.3):
    """Tabulated cost ``c(a, b) = g(a) + h(b) + d(a, b)`` with ``d >= 0`` and ``d(a, a) = 0``.

    Every cycle sum is ``-sum d <= 0``, so these instances are path bounded.
    A fraction ``ties`` of the ``d`` entries is zero, which creates zero-weight
    cycles; rounding can push those above 0 and the tolerance absorbs that.
    """
    keys = list(range(n))
    g = rng.normal(0, 1, n)
    h = rng.normal(0, 1, n)
    d = rng.exponential(1.0, (n, n))
    d[rng.random((n, n)) < ties] = 0.0
    np.fill_diagonal(d, 0.0)
    M = g[:, None] + h[None, :] + d
    off = rng.random((n, n)) < p_inf
    np.fill_diagonal(off, False)
    M[off] = np.inf
    return Instance(tabulated(keys, keys, M), [pt(i, i) for i in keys], tol)


def coulomb_points(rng, n):
    pts = []
    while len(pts) < n:
        x, y = (float(v) for v in np.round(rng.uniform(0, 4, 2), 2))
        if x != y:
            pts.append(pt(x, y))
    return pts


def polar_ominus_chain(rng, k):
    """Random minus-order chain inside {x > 0, xy > 1}."""
    xs = np.sort(rng.uniform(0.3, 4.0, k))
    offs = np.sort(rng.uniform(0.05, 3.0, k))[::-1]
    return [pt(float(x), float(1.0 / x + o)) for x, o in zip(xs, offs)]


def plane_oplus_chain(rng, k):
    xs = np.sort(rng.uniform(-3, 3, k))
    ys = np.sort(rng.uniform(-3, 3, k))
    return [pt(float(x), float(y)) for x, y in zip(xs, ys)]


POLAR_D1 = CostSpec("polar", {"region": "D1"})
BREGMAN_SQUARE = CostSpec("bregman", {"generator": "square"})


def extension_violations(cx, tol=1e-9):
    """Names of the chain-extension properties that fail on ``cx`` (empty when all hold)."""
    from cpotential.chainext import SegmentComplex, chain_extension, is_chain, predecessor_profile

    ext = chain_extension(cx)
    order = cx.order
    inputs = [(p.x[0], p.y[0]) for p in cx.samples()]
    dense = ext.sample(20.0)
    bad = []
    if not is_chain(dense, order).chain:
        bad.append("not a chain")
    if not all(ext.contains(p, tol) for p in inputs):
        bad.append("input not contained")
    srt = [inputs[i] for i in is_chain(inputs, order).sorted_indices]
    if ext.minimum() != srt[0] or ext.maximum() != srt[-1]:
        bad.append("min/max moved")
    # sampling the extension and extending again gives back the same set
    again = chain_extension(SegmentComplex(ext.sample(5.0), [], order))
    if not (all(ext.contains(p, tol) for p in again.sample(20.0)) and all(again.contains(p, tol) for p in ext.polyline)):
        bad.append("not closed under sampling")
    segs = ext.all_segments()
    for p in dense:
        L, U = predecessor_profile(order, segs, p)
        if abs(L - p[0]) > tol or abs(U - p[1]) > tol:
            bad.append(f"profile of {p} is {(L, U)}")
            break
    return bad
