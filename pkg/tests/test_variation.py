import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpotential.costs import CostSpec, FunctionSpec, pt
from cpotential.graph import build_variation_graph, enumerate_walks, walk_classification
from cpotential.instance import Instance
from cpotential.variation import (RefinementError, all_pairs_variation, cycle_weight, find_positive_cycle,
                                  max_inner_variation, variation_growth, variation_matrix)
from cpotential.worked import coulomb_four, coulomb_instance

from helpers import coulomb_points, monotone_table_instance, table_instance

seeds = st.integers(0, 100_000)


def test_coulomb_frozen_entries():
    F = variation_matrix(coulomb_four())
    assert F[1, 3] == pytest.approx(0.5)
    assert F[0, 3] == pytest.approx(1.0)
    assert F[0, 3] == pytest.approx(1.5 - 1 / (4 - 2))
    assert F[1, 0] == -math.inf
    assert F.path_bounded and F.cyclically_monotone


def test_halfline_diag_frozen_entries():
    F = variation_matrix(Instance(CostSpec("halfline_diag"), [pt(k, k) for k in range(3)]))
    assert F[0, 2] == 2.0
    assert F[2, 0] == -math.inf


def test_two_cycle_for_negative_pairing():
    inst = Instance(CostSpec("classical_pairing"), [pt(0, 1), pt(1, 0)])
    F = variation_matrix(inst)
    assert not F.cyclically_monotone and not F.path_bounded
    assert F[0, 0] == math.inf
    chk = find_positive_cycle(build_variation_graph(inst))
    assert chk.positive_cycle and chk.weight == pytest.approx(1.0)
    assert sorted(chk.cycle) == [0, 1]


def test_singleton():
    F = variation_matrix(Instance(CostSpec("coulomb"), [pt(0, 1)]))
    assert F.values.tolist() == [[0.0]] and F.path_bounded and F.cyclically_monotone


def test_text_and_json_render():
    F = variation_matrix(coulomb_four())
    assert "-inf" in F.to_text()
    assert F.to_json()["F"][1][0] == "-inf"


@given(seeds, st.integers(1, 7))
def test_all_pairs_matches_single_pair(seed, n):
    inst = table_instance(np.random.default_rng(seed), n, p_inf=0.4)
    g = build_variation_graph(inst)
    F = all_pairs_variation(g)
    for s in range(n):
        for e in range(n):
            v = max_inner_variation(g, s, e)
            assert v == F[s, e] or abs(v - F[s, e]) <= 1e-9


@given(seeds, st.integers(1, 7))
def test_relaxation_matches_walk_oracle(seed, n):
    inst = table_instance(np.random.default_rng(seed), n, p_inf=0.5)
    g = build_variation_graph(inst)
    oracle = walk_classification(g)
    for s in range(n):
        for e in range(n):
            v = max_inner_variation(g, s, e)
            assert v == oracle[s, e]
            if math.isfinite(v):
                assert enumerate_walks(g, s, e, n * (n + 1)) == v


@given(seeds, st.integers(1, 9))
def test_all_pairs_matches_walk_classification(seed, n):
    g = build_variation_graph(table_instance(np.random.default_rng(seed), n, p_inf=0.4))
    F = all_pairs_variation(g).values
    W = walk_classification(g)
    assert np.array_equal(np.isinf(F) & (F > 0), np.isinf(W) & (W > 0))
    assert np.array_equal(F == -np.inf, W == -np.inf)
    fin = np.isfinite(F)
    assert np.allclose(F[fin], W[fin], rtol=0, atol=1e-12)


@given(seeds, st.integers(1, 9))
def test_path_bounded_iff_cyclically_monotone(seed, n):
    rng = np.random.default_rng(seed)
    inst = table_instance(rng, n) if seed % 2 else monotone_table_instance(rng, n)
    F = variation_matrix(inst)
    cm = not find_positive_cycle(build_variation_graph(inst)).positive_cycle
    assert F.path_bounded == cm == F.cyclically_monotone


@given(seeds, st.integers(2, 9))
def test_triangle_inequality(seed, n):
    inst = monotone_table_instance(np.random.default_rng(seed), n)
    F = variation_matrix(inst)
    assert F.path_bounded
    V = F.values
    lhs = V[:, :, None] + V[None, :, :]  # F(s, m) + F(m, e) at [s, m, e]
    with np.errstate(invalid="ignore"):
        gap = lhs - V[:, None, :]
    worst = np.max(gap, initial=-math.inf, where=np.isfinite(lhs))
    assert worst <= 1e-9


@given(seeds, st.integers(1, 9))
def test_one_step_lower_bound(seed, n):
    inst = table_instance(np.random.default_rng(seed), n)
    g = build_variation_graph(inst)
    F = all_pairs_variation(g)
    W = g.weights
    fin = np.isfinite(W)
    assert np.all(W[fin] <= F.values[fin] + 1e-12)


@given(seeds, st.integers(2, 8), st.floats(-2, 2), st.floats(-2, 2))
def test_separable_perturbation_shifts_variation(seed, n, a, b):
    rng = np.random.default_rng(seed)
    pts = coulomb_points(rng, n)
    base = Instance(CostSpec("coulomb"), pts)
    pert = Instance(CostSpec("coulomb").with_perturbation(FunctionSpec("affine", a, 0.0), FunctionSpec("sin", b)), pts)
    F0, F1 = variation_matrix(base), variation_matrix(pert)
    xs = np.array([p.x[0] for p in pts])
    shift = a * (xs[:, None] - xs[None, :])  # g(x_s) - g(x_e); h terms telescope away
    fin = np.isfinite(F0.values)
    assert np.array_equal(fin, np.isfinite(F1.values))
    assert np.allclose(F1.values[fin], (F0.values + shift)[fin], atol=1e-9)


@given(seeds, st.integers(2, 8), st.integers(1, 4))
def test_variation_grows_with_the_set(seed, n, extra):
    rng = np.random.default_rng(seed)
    inst = monotone_table_instance(rng, n + extra)
    small = inst.subset(range(n))
    F_small = variation_matrix(small).values
    F_big = variation_matrix(inst).values[:n, :n]
    assert np.all(F_small <= F_big + 1e-9)


def test_growth_constant_on_repeated_set():
    pts = coulomb_four().points
    g = variation_growth(CostSpec("coulomb"), [pts, pts, pts], pts[0], pts[3])
    assert len(set(g.values)) == 1 and g.nondecreasing


def test_growth_constant_along_coulomb_refinements():
    fam = [coulomb_instance(step).points for step in (0.5, 0.25, 0.125)]
    g = variation_growth(CostSpec("coulomb"), fam, pt(3, 2), pt(4, 2))
    assert g.values == pytest.approx([0.5, 0.5, 0.5], abs=1e-12)


def test_growth_refuses_non_nested_family():
    with pytest.raises(RefinementError):
        variation_growth(CostSpec("coulomb"), [[pt(0, 1), pt(2, 3)], [pt(0, 1), pt(4, 5)]], pt(0, 1), pt(0, 1))


def test_cycle_weight_helper():
    g = build_variation_graph(Instance(CostSpec("classical_pairing"), [pt(0, 1), pt(1, 0)]))
    assert cycle_weight(g, [0, 1]) == pytest.approx(1.0)


def test_tolerance_absorbs_rounding_cycles():
    # a zero-weight cycle that rounds to +1e-16 must not count as positive
    inst = Instance(CostSpec("halfline_diag"), [pt(0.1, 0.1), pt(0.3, 0.3)])
    assert variation_matrix(inst).cyclically_monotone
