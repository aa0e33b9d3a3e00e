import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bcnopt.errors import ValidationError
from bcnopt.network import build_assr, cost_table, feasible_region
from bcnopt.oracle import random_feasible_network
from bcnopt.solvers import (Policy, SolverConfig, bellman_residual, evaluate_policy_exact,
                            extract_policy, feedback_matrix, madani, rollout, rollout_horizon,
                            value_iteration)
from bcnopt.stg import build_stg
from bcnopt.stp import LogicalMatrix, delta

from conftest import make_problem


@pytest.fixture
def self_loop():
    # one admissible state with a self-loop of cost 2
    return make_problem([[1], [1]], [[2.0], [0.0]], frozenset({1}))


@pytest.fixture
def forced_cycle():
    return make_problem([[2], [1]], [[1.0], [3.0]])


def test_config_validation():
    for lam in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValidationError):
            SolverConfig(lam)
    with pytest.raises(ValidationError):
        SolverConfig(0.5, theta=-1)
    with pytest.raises(ValidationError):
        value_iteration(make_problem([[1], [1]], [[0.0], [0.0]])[3], 1.0)


# --- value iteration --------------------------------------------------------

def test_vi_geometric_series(self_loop):
    res = value_iteration(self_loop[3], 0.5, 1e-9)
    assert res.converged
    assert abs(res.values[1] - 4.0) < 1e-8


def test_vi_forced_cycle(forced_cycle):
    res = value_iteration(forced_cycle[3], 0.5, 1e-12)
    assert res.values[1] == pytest.approx(10 / 3, abs=1e-10)
    assert res.values[2] == pytest.approx(14 / 3, abs=1e-10)


def test_vi_gauss_seidel_is_in_place(forced_cycle):
    # first sweep: V(1) = 1 + 0.5 * 0, then V(2) = 3 + 0.5 * V(1) = 3.5
    res = value_iteration(forced_cycle[3], 0.5, 0.0, max_iterations=1)
    assert res.values.values.tolist() == [1.0, 3.5]
    jac = value_iteration(forced_cycle[3], 0.5, 0.0, max_iterations=1, sweep="jacobi")
    assert jac.values.values.tolist() == [1.0, 3.0]


def test_vi_cap_flags_non_convergence(forced_cycle):
    res = value_iteration(forced_cycle[3], 0.5, 0.0, max_iterations=5)
    assert res.iterations == 5
    assert not res.converged
    assert np.all(np.isfinite(res.values.values))


def test_vi_initial_values(forced_cycle):
    exact = np.array([10 / 3, 14 / 3])
    res = value_iteration(forced_cycle[3], 0.5, 1e-12, initial=exact)
    assert res.iterations == 1
    with pytest.raises(ValidationError):
        value_iteration(forced_cycle[3], 0.5, initial=[0.0])


# --- Madani -----------------------------------------------------------------

def test_madani_single_vertex(self_loop):
    values, ws = madani(self_loop[3], 0.5, return_workspace=True)
    assert ws.d.tolist() == [[0.0], [2.0]]
    assert ws.y.tolist() == [[4.0]]
    assert values[1] == 4.0


def test_madani_two_option(two_option):
    values = madani(two_option[3], 0.5)
    assert values[2] == pytest.approx(4.0, abs=1e-12)
    assert values[1] == pytest.approx(2.0, abs=1e-12)


def test_madani_workspace_shapes(two_option):
    values, ws = madani(two_option[3], 0.5, return_workspace=True)
    assert ws.d.shape == (3, 2)
    assert ws.y.shape == (2, 2)
    assert np.all(ws.d[0] == 0)
    assert np.array_equal(ws.y.min(axis=0), values.values)
    rolled = madani(two_option[3], 0.5)
    assert np.array_equal(rolled.values, values.values)


# --- policies ---------------------------------------------------------------

def test_extract_policy_two_option(two_option):
    assr, _, _, g = two_option
    pol = extract_policy(g, madani(g, 0.5), 0.5)
    assert pol[1] == 2
    assert assr.successor(1, pol[1]) == 2


def test_extract_policy_singleton_inputs():
    succ = [[2, 1], [1, 2]]
    assr, _, _, g = make_problem(succ, [[5.0, 0.0], [0.0, 5.0]], frozenset({1, 2}),
                                 {1: {1}, 2: {1}})
    for V in ([0.0, 0.0], [100.0, -100.0]):
        pol = extract_policy(g, type(madani(g, 0.5))(g.vertices, np.array(V)), 0.5)
        assert pol.as_dict() == {1: 1, 2: 1}


def test_feedback_matrix_example():
    pol = Policy(np.array([1]), np.array([2]))
    K = feedback_matrix(pol, 2, 4)
    assert K == LogicalMatrix(2, [2, 1, 1, 1])
    assert K @ delta(4, 1) == delta(2, 2)


def test_evaluate_chain():
    # 1 -> 2 -> 3 -> 3 with costs 1, 2, 4
    assr, _, _, g = make_problem([[2], [3], [3], [4]], [[1.0], [2.0], [4.0], [0.0]],
                                 frozenset({1, 2, 3}))
    pol = Policy(g.vertices, np.ones(3, dtype=np.int64))
    v = evaluate_policy_exact(g, pol, 0.5)
    assert v.as_dict() == {1: 4.0, 2: 6.0, 3: 8.0}


def test_evaluate_constant_cycle():
    # 4-cycle with cost 3 everywhere
    assr, _, _, g = make_problem([[2], [3], [4], [1]], np.full((4, 1), 3.0))
    v = evaluate_policy_exact(g, Policy(g.vertices, np.ones(4, dtype=np.int64)), 0.7)
    assert np.allclose(v.values, 3 / 0.3, atol=1e-12)


def test_evaluate_rejects_infeasible_policy():
    assr, _, _, g = make_problem([[1, 2], [2, 2]], [[0.0, 0.0], [0.0, 0.0]], frozenset({1}))
    with pytest.raises(ValidationError):
        evaluate_policy_exact(g, Policy(g.vertices, np.array([2])), 0.5)


# --- rollouts ---------------------------------------------------------------

def test_rollout_self_loop(self_loop):
    assr, costs, region, g = self_loop
    K = feedback_matrix(extract_policy(g, madani(g, 0.5), 0.5), assr.M, assr.N)
    res = rollout(assr, costs, K, 1, 0.5, epsilon=1e-6, region=region)
    assert abs(res.discounted_cost - 4.0) < 1e-6
    assert res.horizon == rollout_horizon(0.5, 2.0, 1e-6)


def test_rollout_zero_horizon(self_loop):
    assr, costs, region, _ = self_loop
    K = LogicalMatrix(1, [1, 1])
    res = rollout(assr, costs, K, 1, 0.5, horizon=0)
    assert res.inputs == [] and res.discounted_cost == 0.0 and res.states == [1]


def test_rollout_errors(two_option):
    assr, costs, region, g = two_option
    K = LogicalMatrix(2, [1, 1])
    with pytest.raises(ValueError):
        rollout(assr, costs, K, 1, 0.5)
    with pytest.raises(ValueError):
        rollout(assr, costs, K, 3, 0.5, horizon=1)
    # leave the region: only state 1 allowed, input 2 drives it to state 2
    sub = make_problem([[1, 2], [2, 2]], costs, frozenset({1}))
    with pytest.raises(ValueError):
        rollout(sub[0], costs, K, 2, 0.5, horizon=3, region=sub[2])
    with pytest.raises(RuntimeError):
        rollout(sub[0], costs, LogicalMatrix(2, [2, 2]), 1, 0.5, horizon=3, region=sub[2])


def test_rollout_horizon_is_smallest():
    for lam, gmax, eps in [(0.5, 108.0, 1e-4), (0.9, 5.0, 1e-6), (0.99, 1.0, 1e-3)]:
        T = rollout_horizon(lam, gmax, eps)
        assert lam ** T * gmax / (1 - lam) < eps
        assert lam ** (T - 1) * gmax / (1 - lam) >= eps
    assert rollout_horizon(0.5, 0.0, 1e-3) == 0


# --- properties on random instances ------------------------------------------

def _instance(seed, lam_choices=(0.3, 0.5, 0.9)):
    rng = np.random.default_rng(seed)
    net = random_feasible_network(rng, int(rng.integers(1, 5)), int(rng.integers(0, 3)),
                                  constrained=bool(rng.integers(0, 2)))
    assr = build_assr(net)
    region = feasible_region(assr, net.constraints)
    g = build_stg(assr, net.cost, region)
    lam = float(lam_choices[seed % len(lam_choices)])
    return net, assr, region, g, lam


SEEDS = range(40)


@pytest.mark.parametrize("seed", SEEDS)
def test_madani_bellman_residual(seed):
    _, _, _, g, lam = _instance(seed)
    v = madani(g, lam)
    assert bellman_residual(g, v, lam) <= 1e-9 * (1 + np.max(np.abs(v.values)))


@pytest.mark.parametrize("seed", SEEDS)
def test_vi_agrees_with_madani(seed):
    _, _, _, g, lam = _instance(seed)
    theta = 1e-12
    vi = value_iteration(g, lam, theta)
    assert vi.converged
    assert np.max(np.abs(vi.values.values - madani(g, lam).values)) <= theta * lam / (1 - lam) + 1e-9


@pytest.mark.parametrize("seed", SEEDS)
def test_extracted_policy_is_optimal(seed):
    _, _, _, g, lam = _instance(seed)
    v = madani(g, lam)
    pol = extract_policy(g, v, lam)
    assert np.allclose(evaluate_policy_exact(g, pol, lam).values, v.values, rtol=0, atol=1e-9)


@pytest.mark.parametrize("seed", SEEDS)
def test_jacobi_contraction(seed):
    _, _, _, g, lam = _instance(seed)
    res = value_iteration(g, lam, 1e-10, sweep="jacobi")
    psi = res.changes
    assert all(b <= lam * a + 1e-12 for a, b in zip(psi, psi[1:]))


@pytest.mark.parametrize("seed", SEEDS)
def test_rollout_matches_value(seed):
    net, assr, region, g, lam = _instance(seed)
    v = madani(g, lam)
    K = feedback_matrix(extract_policy(g, v, lam), assr.M, assr.N)
    eps = 1e-6
    for x0 in region.states:
        res = rollout(assr, net.cost, K, x0, lam, epsilon=eps, region=region)
        assert abs(res.discounted_cost - v[x0]) < eps
        assert all(region.contains(x) for x in res.states)


@pytest.mark.parametrize("seed", range(15))
@pytest.mark.parametrize("alpha", [0.25, 3.0])
def test_scale_covariance(seed, alpha):
    net, assr, region, g, lam = _instance(seed)
    costs = cost_table(net.cost, net.n, net.m)
    v = madani(g, lam)
    g2 = build_stg(assr, alpha * costs, region)
    v2 = madani(g2, lam)
    assert np.allclose(v2.values, alpha * v.values, rtol=1e-12, atol=1e-9)
    pol = extract_policy(g2, v2, lam)
    assert np.allclose(evaluate_policy_exact(g2, pol, lam).values, v2.values, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.05, 0.95))
def test_madani_vs_vi_any_lambda(seed, lam):
    _, _, _, g, _ = _instance(seed)
    v = madani(g, lam)
    vi = value_iteration(g, lam, 1e-11)
    assert np.max(np.abs(vi.values.values - v.values)) <= 1e-11 * lam / (1 - lam) + 1e-8
