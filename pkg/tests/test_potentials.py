import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpotential.costs import CostSpec, pt, tabulated
from cpotential.graph import build_variation_graph, condensation
from cpotential.instance import Instance
from cpotential.potentials import (Antiderivative, BoundaryFailure, FiberError, NotPathBoundedError,
                                   PartitionError, Potential, PotentialError, check_subdifferential,
                                   collapse_to_psi, combine_components, construct_auto, construct_from_boundary,
                                   construct_incremental, extend_potential, pick_gamma, select_terminals_auto,
                                   verify_antiderivative)
from cpotential.variation import all_pairs_variation, variation_matrix
from cpotential.worked import coulomb_four, ex51

from helpers import monotone_table_instance, table_instance

seeds = st.integers(0, 100_000)
COULOMB_F = (0.0, -0.5, -5 / 6, -1.0)


def test_gamma_rule():
    assert pick_gamma(-1.0, 0.0) == -0.5
    assert pick_gamma(-math.inf, 2.0) == 2.0
    assert pick_gamma(3.0, math.inf) == 3.0
    assert pick_gamma(-math.inf, math.inf) == 0.0


def test_incremental_on_coulomb():
    f = construct_incremental(variation_matrix(coulomb_four()))
    assert f.values == pytest.approx(COULOMB_F)
    assert f.trace[0].alpha == -math.inf and f.trace[0].beta == math.inf
    # from the third node on both bounds coincide
    assert all(s.alpha == pytest.approx(s.beta) for s in f.trace[2:])


def test_incremental_on_pairing_diagonal():
    F = variation_matrix(Instance(CostSpec("classical_pairing"), [pt(0, 0), pt(1, 1)]))
    f = construct_incremental(F)
    assert f.values.tolist() == [0.0, -0.5]
    assert (f.trace[1].alpha, f.trace[1].beta) == (-1.0, 0.0)


def test_incremental_singleton():
    f = construct_incremental(variation_matrix(Instance(CostSpec("coulomb"), [pt(0, 1)])))
    assert f.values.tolist() == [0.0]


def test_incremental_refuses_unbounded():
    F = variation_matrix(Instance(CostSpec("classical_pairing"), [pt(0, 1), pt(1, 0)]))
    with pytest.raises(NotPathBoundedError) as exc:
        construct_incremental(F)
    assert (0, 0) in exc.value.pairs


def test_sinks_on_coulomb():
    f = construct_from_boundary(variation_matrix(coulomb_four()), "sinks", [0, 3])
    assert f[1] == pytest.approx(0.5)
    assert verify_antiderivative(coulomb_four(), f).ok


def test_sinks_fail_right_of_the_terminal():
    inst = Instance(CostSpec("halfline_diag"), [pt(k, k) for k in range(6)])
    with pytest.raises(BoundaryFailure) as exc:
        construct_from_boundary(variation_matrix(inst), "sinks", [3])
    assert exc.value.neg_inf_nodes == [4, 5] and exc.value.pos_inf_nodes == []
    assert exc.value.to_json()["neg_inf_nodes"] == [4, 5]


def test_terminal_selection():
    g = build_variation_graph(coulomb_four())
    assert select_terminals_auto(condensation(g)) == [0, 1]
    box = Instance(CostSpec("polar", {"region": "D1"}), [pt(a, b) for a in (2, 3) for b in (1, 2)])
    assert select_terminals_auto(condensation(build_variation_graph(box))) == [0]
    f = construct_auto(g, all_pairs_variation(g))
    assert f.construction == "condensation_auto" and verify_antiderivative(g, f).ok


def test_verify_diagonal_signs():
    inst = Instance(CostSpec("halfline_diag"), [pt(k, k) for k in range(20)])
    assert verify_antiderivative(inst, [-float(k) for k in range(20)]).ok
    two = Instance(CostSpec("halfline_diag"), [pt(0, 0), pt(1, 1)])
    rep = verify_antiderivative(two, [0.0, 1.0])
    assert not rep.ok and rep.witness_pair == (0, 1)
    assert rep.worst_violation == pytest.approx(2.0)


def test_verify_reports_non_finite_values():
    rep = verify_antiderivative(coulomb_four(), [0.0, math.inf, 0.0, 0.0])
    assert not rep.ok and rep.witness_pair == (1, 1)


def test_collapse_to_psi():
    psi = collapse_to_psi(coulomb_four(), np.array(COULOMB_F))
    assert psi == pytest.approx({(2.0,): 0.0, (3.0,): -0.5, (3.5,): -5 / 6, (4.0,): -1.0})
    shared = Instance(CostSpec("coulomb"), [pt(1, 2), pt(1, 3)])
    assert collapse_to_psi(shared, [0.25, 0.25]) == {(1.0,): 0.25}
    with pytest.raises(FiberError):
        collapse_to_psi(shared, [0.0, 1.0])


def test_potential_values_on_coulomb():
    inst = coulomb_four()
    pot = extend_potential(inst, collapse_to_psi(inst, np.array(COULOMB_F)))
    assert pot(3.0) == pytest.approx(-0.5)
    assert pot(2.0) == pytest.approx(0.0)
    assert check_subdifferential(inst, pot, probe_grid=np.linspace(0, 6, 61)).ok


def test_potential_is_infinite_off_the_domain_slice():
    inst = Instance(CostSpec("polar", {"region": "D1"}), [pt(2, 2), pt(3, 1)])
    f = construct_incremental(variation_matrix(inst))
    pot = extend_potential(inst, collapse_to_psi(inst, f))
    assert pot(0.1) == math.inf  # 0.1 * y <= 1 for both y values


def test_classical_subdifferential_graph():
    xs = [-2.0, -1.0, 0.0, 0.5, 2.0]
    inst = Instance(CostSpec("classical_pairing"), [pt(x, x) for x in xs])
    psi = {(x,): -x * x / 2 for x in xs}
    pot = extend_potential(inst, psi)
    assert check_subdifferential(inst, pot, probe_grid=np.linspace(-3, 3, 25)).ok
    bad = dict(psi)
    bad[(0.5,)] += 1.0
    with pytest.raises(PotentialError):
        extend_potential(inst, bad)
    # the bad term is never active; probing between the sample points exposes it
    rep = check_subdifferential(inst, Potential(inst, bad), probe_grid=np.linspace(-3, 3, 25))
    assert not rep.ok and rep.witnesses


def test_combine_components():
    ex = ex51(levels=1, samples=3)
    inst = ex.instance()
    f = construct_incremental(variation_matrix(inst))
    out = combine_components(inst, ["D1"] * inst.n, {"D1": f})
    assert np.array_equal(out.values, f.values)

    keys = [1, 2, -1, -2]
    M = np.array([[0.0 if a * b > 0 else np.inf for b in keys] for a in keys])
    toy = Instance(tabulated(keys, keys, M), [pt(k, k) for k in keys])
    glued = combine_components(toy, ["pos", "pos", "neg", "neg"], {"pos": [0.0, 0.0], "neg": [7.0, 7.0]})
    assert verify_antiderivative(toy, glued).ok

    with pytest.raises(PartitionError) as exc:
        combine_components(coulomb_four(), ["a", "b", "b", "b"], {"a": [0.0], "b": [0.0, 0.0, 0.0]})
    assert exc.value.edge == (0, 1)


def test_antiderivative_rejects_unknown_construction():
    with pytest.raises(PotentialError):
        Antiderivative([0.0], "guess")


@given(seeds, st.integers(1, 10), st.floats(-100, 100))
def test_gauge_freedom(seed, n, shift):
    inst = monotone_table_instance(np.random.default_rng(seed), n)
    f = construct_incremental(variation_matrix(inst))
    assert verify_antiderivative(inst, f.shifted(shift), tol=1e-7).ok


@given(seeds, st.integers(1, 10))
def test_every_insertion_step_keeps_the_prefix_valid(seed, n):
    rng = np.random.default_rng(seed)
    inst = monotone_table_instance(rng, n)
    F = variation_matrix(inst)
    order = [int(i) for i in rng.permutation(n)]
    f = construct_incremental(F, order)
    V = F.values
    for k, step in enumerate(f.trace):
        assert step.alpha <= step.gamma + 1e-9 and step.gamma <= step.beta + 1e-9
        done = order[: k + 1]
        for i in done:
            for j in done:
                assert V[i, j] <= f[i] - f[j] + 1e-9


@given(seeds, st.integers(1, 9))
def test_sources_are_sinks_on_the_reversed_graph(seed, n):
    inst = monotone_table_instance(np.random.default_rng(seed), n, p_inf=0.0)
    g = build_variation_graph(inst)
    F = all_pairs_variation(g)
    R = all_pairs_variation(g.reversed())
    terms = [0]
    src = construct_from_boundary(F, "sources", terms)
    snk = construct_from_boundary(R, "sinks", terms)
    assert np.allclose(src.values, -snk.values)
    assert verify_antiderivative(g, src, tol=1e-7).ok


@given(seeds, st.integers(1, 9))
def test_all_nodes_as_sinks_always_works(seed, n):
    inst = monotone_table_instance(np.random.default_rng(seed), n)
    g = build_variation_graph(inst)
    f = construct_from_boundary(all_pairs_variation(g), "sinks", range(n))
    assert np.all(f.values >= 0) and verify_antiderivative(g, f, tol=1e-7).ok


@given(seeds, st.integers(1, 10))
def test_auto_sinks_expose_positive_cycles(seed, n):
    inst = table_instance(np.random.default_rng(seed), n)
    g = build_variation_graph(inst)
    F = all_pairs_variation(g)
    if F.path_bounded:
        assert verify_antiderivative(g, construct_auto(g, F)).ok
    else:
        with pytest.raises(BoundaryFailure) as exc:
            construct_auto(g, F)
        assert exc.value.pos_inf_nodes
