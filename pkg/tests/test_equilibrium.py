import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from camdp import (
    EnumerationSizeError,
    FactoredCamdp,
    JointPolicy,
    SolverConfig,
    alternate_iterate,
    check_conditions,
    check_dominance_condition,
    check_global_convergence,
    check_observability,
    check_response_exactness,
    dominance_counts,
    enumerate_value_matrix,
    find_nash_equilibria,
)
from camdp.equilibrium import ValueMatrix, enumerate_sub_policies, policy_index
from conftest import random_model


def vm_of(values):
    values = np.asarray(values, dtype=float)
    return ValueMatrix(values, 0.9, "max", list(range(values.shape[0])), list(range(values.shape[1])))


def brute_ne(V):
    return {
        (i, j)
        for i in range(V.shape[0])
        for j in range(V.shape[1])
        if V[i, j] >= V[:, j].max() and V[i, j] >= V[i, :].max()
    }


def test_enumeration_order_is_lexicographic():
    pols = enumerate_sub_policies(2, 4)
    assert pols[0] == (0, 0, 0, 0) and pols[1] == (0, 0, 0, 1) and pols[-1] == (1, 1, 1, 1)
    assert pols.index((1, 1, 0, 0)) == 12 == policy_index((1, 1, 0, 0), 2)


def test_one_by_one_matrix():
    m = random_model(0, dims=(2, 2, 2, 1, 1))
    vm = enumerate_value_matrix(m, SolverConfig())
    assert vm.shape == (1, 1)
    assert find_nash_equilibria(vm) == [(0, 0)]
    assert dominance_counts(vm) == (1, 1, 1)
    assert check_dominance_condition(vm)[0]
    assert check_global_convergence(m, SolverConfig())[0]


def test_enumeration_cap():
    m = random_model(0, dims=(2, 2, 2, 2, 2))
    with pytest.raises(EnumerationSizeError, match="reduction"):
        enumerate_value_matrix(m, SolverConfig(), cap=100)


def test_strictly_dominant_cell():
    V = np.array([[1.0, 2.0], [3.0, 9.0]])
    assert find_nash_equilibria(vm_of(V)) == [(1, 1)]


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.int64, st.integers(2, 6), elements=st.integers(-50, 50), unique=True),
    arrays(np.int64, st.integers(2, 6), elements=st.integers(-50, 50), unique=True),
)
def test_separable_values(f, g):
    f, g = f / 10.0, g / 10.0
    vm = vm_of(f[:, None] + g[None, :])
    i, j = int(np.argmax(f)), int(np.argmax(g))
    assert find_nash_equilibria(vm) == [(i, j)]
    assert dominance_counts(vm)[:2] == (1, 1)
    holds, witness = check_dominance_condition(vm)
    assert holds and witness == ("row", i)


def test_counterexample_has_no_dominating_line():
    vm = vm_of([[2.0, 0.0], [1.0, 3.0]])
    assert check_dominance_condition(vm) == (False, None)
    assert set(find_nash_equilibria(vm)) == {(0, 0), (1, 1)}


@settings(max_examples=200, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 7), st.integers(1, 7)), elements=st.integers(0, 30)))
def test_ne_matches_brute_force_and_count_bound(V):
    # small integer range so ties (and multiple equilibria) are common
    V = V / 3.0
    vm = vm_of(V)
    ne = find_nash_equilibria(vm)
    assert set(ne) == brute_ne(V)
    assert [V[c] for c in ne] == sorted((V[c] for c in ne), reverse=True)


@settings(max_examples=200, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 7), st.integers(1, 7)), elements=st.integers(0, 200), unique=True))
def test_ne_count_bound_with_distinct_values(V):
    vm = vm_of(V / 7.0)
    assert len(find_nash_equilibria(vm)) <= dominance_counts(vm)[2]


def test_ne_count_bound_needs_distinct_values():
    # one row of ties: both cells are equilibria but only one row dominates
    vm = vm_of([[1.0, 1.0]])
    assert len(find_nash_equilibria(vm)) == 2 and dominance_counts(vm) == (2, 1, 1)


def test_case_study_matrix(case_model):
    vm = enumerate_value_matrix(case_model, SolverConfig(gamma=0.98))
    assert vm.shape == (16, 16)
    assert vm.max == pytest.approx(9.99, abs=0.01)
    ne = find_nash_equilibria(vm)
    assert ne[0] == vm.index(JointPolicy([0, 1, 0, 0], [0, 0, 0, 0]))
    local = vm.index(JointPolicy([1, 1, 0, 0], [1, 0, 0, 0]))
    assert local in ne and vm.values[local] == pytest.approx(9.81, abs=0.01)
    assert vm.min_gap > 0


def test_case_study_not_globally_convergent(case_model):
    cfg = SolverConfig(gamma=0.98)
    ok, basin = check_global_convergence(case_model, cfg)
    assert not ok
    key = ("agent0", "converged", str(JointPolicy([1, 1, 0, 0], [1, 0, 0, 0])))
    assert basin[key] >= 1
    assert sum(n for (mover, _, _), n in basin.items() if mover == "agent0") == 256


def test_observability_vacuous_without_private_states():
    m = random_model(4, dims=(1, 3, 1, 2, 2))
    assert check_observability(m, SolverConfig())


def test_observability_when_unobserved_factor_is_irrelevant():
    base = random_model(5, dims=(2, 2, 2, 2, 1))
    p1 = np.array([[[0.3, 0.7], [0.3, 0.7]]])
    m = FactoredCamdp.from_arrays(base.p0, base.ps, p1, base.r0, base.rs, np.ones((1, 2, 2)))
    assert check_observability(m, SolverConfig())


def test_observability_fails_on_case_study(case_model):
    assert not check_observability(case_model, SolverConfig(gamma=0.98))


@pytest.mark.parametrize("seed", range(6))
def test_dominance_and_observability_imply_global_convergence(seed):
    # ns0 = ns1 = 1 makes observability hold, so the implication is exercised
    m = random_model(seed, dims=(1, 2, 1, 2, 2))
    report = check_conditions(m, SolverConfig())
    assert report.cond2 and report.cond2_response
    if report.cond1:
        assert report.cond3
    assert not report.implication_violated
    assert len(report.nash_equilibria) <= report.ne_bound


@pytest.mark.parametrize("seed", [0, 2, 3, 4])
def test_dominant_line_reaches_optimum_in_two_rounds(seed):
    # seeds chosen so the value matrix has a dominating row or column
    m = random_model(seed, dims=(1, 2, 1, 2, 2))
    cfg = SolverConfig()
    vm = enumerate_value_matrix(m, cfg)
    assert check_dominance_condition(vm)[0]
    for a in vm.policies0:
        for b in vm.policies1:
            for mover in ("agent0", "agent1"):
                t = alternate_iterate(m, JointPolicy(a, b), cfg.replace(first_mover=mover))
                movers = [s for s in t.steps if s.mover != "init"]
                assert max(s.value for s in movers[:3]) >= vm.max - 1e-9


def test_observability_implies_response_exactness():
    for seed in range(10):
        m = random_model(seed)
        cfg = SolverConfig()
        if check_observability(m, cfg):
            assert check_response_exactness(m, cfg)


def test_report_serialises(case_model):
    d = check_conditions(case_model, SolverConfig(gamma=0.98)).as_dict()
    assert d["cond1"] is False or d["cond1_witness"] is not None
    assert {"cond1", "cond2", "cond3", "cond2_response", "n_dc", "n_dr", "ne_bound", "basin"} <= set(d)
