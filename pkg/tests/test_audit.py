import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpotential.audit import (ConjugateError, conjugate_transform, mixed_partial_grid, monotonicity_audit,
                              rectangle_sum)
from cpotential.costs import CostSpec, FunctionSpec, cost_matrix

coord = st.floats(-3, 3, allow_nan=False)


def test_conjugate_frozen_values():
    assert conjugate_transform(CostSpec("classical_pairing"), {0.0: 0.0, 1.0: 0.0}, [0.0, 1.0], 2.0) == -2.0
    assert conjugate_transform(CostSpec("coulomb"), lambda x: 0.0, [3.0, 4.0], 2.0) == 0.5


def test_conjugate_empty_slice_is_plus_inf(caplog):
    r = conjugate_transform(CostSpec("halfline_diag"), lambda x: 0.0, [0.0, 1.0], 5.0, detail=True)
    assert r.value == math.inf and r.empty_slice
    assert "empty" in caplog.text


def test_conjugate_needs_psi_on_sample():
    with pytest.raises(ConjugateError):
        conjugate_transform(CostSpec("coulomb"), {3.0: 0.0}, [3.0, 4.0], 2.0)


def test_conjugate_mirrored():
    # inf over y in {0, 1} of (x - y)^2 / 2 - psi(y) at x = 3
    v = conjugate_transform(CostSpec("bregman"), {0.0: 0.0, 1.0: 1.0}, [0.0, 1.0], 3.0, mirrored=True)
    assert v == pytest.approx(1.0)


@given(st.lists(coord, min_size=1, max_size=6), coord)
def test_zero_psi_conjugate_is_slice_minimum(xs, y):
    spec = CostSpec("coulomb")
    col = cost_matrix(spec, [[x] for x in xs], [[y]])[:, 0]
    fin = col[np.isfinite(col)]
    want = float(fin.min()) if fin.size else math.inf
    assert conjugate_transform(spec, lambda x: 0.0, xs, y) == want


def test_rectangle_sums():
    polar = CostSpec("polar", {"region": "D1"})
    assert rectangle_sum(polar, (2, 1), (3, 2)) == pytest.approx(math.log(6 / 5))
    assert rectangle_sum(CostSpec("bregman"), (0, 1), (1, 0)) == pytest.approx(1.0)
    xy = CostSpec("classical_pairing", {"sign": 1.0})
    assert rectangle_sum(xy, (0, 0), (2, 3)) == pytest.approx(6.0)


def test_rectangle_sum_with_corner_outside():
    # both probes lie in D, but the corner (1, 1) has xy = 1
    assert rectangle_sum(CostSpec("polar"), (1, 3), (3, 1)) == -math.inf


def test_audit_verdicts():
    polar = CostSpec("polar", {"region": "D1"})
    rep = monotonicity_audit(polar, [((2, 1), (3, 2)), ((1.5, 2), (2, 1.5))])
    assert rep.consistent_ominus
    rep = monotonicity_audit(CostSpec("bregman"), [((0, 1), (1, 0))])
    assert rep.consistent_oplus
    # the plus order is wrong for polar: an increasing pair with a positive sum is fine, but
    # a decreasing pair with a nonpositive sum is a witness against oplus
    rep = monotonicity_audit(polar, [((1, 3), (3, 1))])
    assert not rep.consistent_oplus and rep.witnesses[0].kind == "corner-outside-domain"


def test_audit_skips_probes_outside_domain():
    rep = monotonicity_audit(CostSpec("polar"), [((0, 0), (1, 1))])
    assert rep.skipped == 1 and not rep.sums


pair = st.tuples(st.tuples(coord, coord), st.tuples(coord, coord))


@given(st.lists(pair, min_size=1, max_size=12), st.floats(-2, 2), st.floats(-2, 2))
def test_separable_perturbation_keeps_verdicts(probes, a, b):
    for base in (CostSpec("polar", {"region": "D1"}), CostSpec("bregman"), CostSpec("coulomb")):
        pert = base.with_perturbation(FunctionSpec("sin", a), FunctionSpec("quadratic", b))
        r0 = monotonicity_audit(base, probes)
        r1 = monotonicity_audit(pert, probes)
        # rectangle sums of c and c + g(x) + h(y) agree up to rounding
        assert np.allclose(r0.sums, r1.sums, atol=1e-9, rtol=1e-12)
        if all(abs(s) > 1e-6 for s in r0.sums if math.isfinite(s)):
            assert (r0.consistent_ominus, r0.consistent_oplus) == (r1.consistent_ominus, r1.consistent_oplus)


def test_mixed_partial_signs():
    polar = CostSpec("polar", {"region": "D1"})
    g = mixed_partial_grid(polar, [1.5, 2.0, 3.0], [1.0, 2.0])
    assert g.sign_ominus and not g.sign_oplus
    g = mixed_partial_grid(CostSpec("classical_pairing"), [0.0, 1.0], [0.0, 1.0])
    assert g.sign_oplus
