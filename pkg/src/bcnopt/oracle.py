"""Brute-force reference solvers and random instances for testing.

These are deliberately naive and share no code path with
:func:`bcnopt.solvers.madani` or :func:`bcnopt.solvers.value_iteration`:
both work on the raw (state, input) tables rather than the collapsed
transition graph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import OracleRefusedError
from .network import (Assr, BooleanNetwork, ConstraintSpec, Region, StageCost, TableCost,
                      build_assr, cost_table, feasible_region)
from .solvers import Policy, ValueTable
from .stg import TransitionGraph

__all__ = [
    "OracleBudget",
    "enumerate_optimal",
    "policy_values_linear",
    "truncated_dp",
    "random_network",
    "random_feasible_network",
]


@dataclass(frozen=True)
class OracleBudget:
    max_policies: int = 1 << 20
    max_horizon: int = 100_000


def policy_values_linear(succ_pos: np.ndarray, cost: np.ndarray, lam: float) -> np.ndarray:
    """Solve ``(I - lam P) v = c`` for a batch of deterministic policies.

    ``succ_pos`` and ``cost`` have shape ``(K, n)``; row ``k`` describes one
    policy over ``n`` states.
    """
    K, n = succ_pos.shape
    P = np.zeros((K, n, n))
    P[np.arange(K)[:, None], np.arange(n)[None, :], succ_pos] = 1.0
    A = np.eye(n)[None] - lam * P
    return np.linalg.solve(A, cost[..., None])[..., 0]


def enumerate_optimal(graph: TransitionGraph, lam: float,
                      budget: OracleBudget = OracleBudget(), chunk: int = 4096,
                      atol: float = 1e-9) -> tuple[ValueTable, Policy]:
    """Optimal values and policy by evaluating every feasible stationary policy.

    Returns the elementwise minimum over all policies together with the
    first enumerated policy that attains it (to within ``atol``) at every
    state.
    """
    region = graph.region
    states = list(region.states)
    choices = [region.inputs(x) for x in states]
    count = 1
    for c in choices:
        count *= len(c)
    if count > budget.max_policies:
        raise OracleRefusedError(f"{count} policies exceed the budget of {budget.max_policies}")

    pos_of = {x: p for p, x in enumerate(states)}
    succ = graph.assr.succ
    costs = graph.costs
    opt_succ = [[pos_of[int(succ[x - 1, u - 1])] for u in c] for x, c in zip(states, choices)]
    opt_cost = [[float(costs[x - 1, u - 1]) for u in c] for x, c in zip(states, choices)]

    best = np.full(len(states), np.inf)
    tables = []
    combos = itertools.product(*[range(len(c)) for c in choices])
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        sp = np.array([[opt_succ[p][k] for p, k in enumerate(row)] for row in block])
        cs = np.array([[opt_cost[p][k] for p, k in enumerate(row)] for row in block])
        v = policy_values_linear(sp, cs, lam)
        best = np.minimum(best, v.min(axis=0))
        tables.append((block, v))

    for block, v in tables:
        hit = np.flatnonzero(np.all(v <= best + atol * (1 + np.abs(best)), axis=1))
        if hit.size:
            row = block[hit[0]]
            inputs = np.array([choices[p][k] for p, k in enumerate(row)], dtype=np.int64)
            verts = np.array(states, dtype=np.int64)
            return ValueTable(verts, best), Policy(verts, inputs)
    raise AssertionError("no single policy attains the optimum at every state")


def truncated_dp(assr: Assr, cost: StageCost | np.ndarray, region: Region, lam: float,
                 horizon: int, budget: OracleBudget = OracleBudget()) -> ValueTable:
    """Optimal ``horizon``-step discounted cost with zero terminal value.

    Differs from the infinite-horizon optimum by at most
    ``lam**horizon * max|g| / (1 - lam)``.
    """
    if not 1 <= horizon <= budget.max_horizon:
        raise ValueError(f"horizon must lie in [1, {budget.max_horizon}]")
    g = np.asarray(cost, dtype=float) if isinstance(cost, np.ndarray) \
        else cost_table(cost, assr.n, assr.m)
    q_mask = np.where(region.allowed, 0.0, np.inf)
    V = np.zeros(assr.N)
    for _ in range(horizon):
        V = np.min(g + q_mask + lam * V[assr.succ - 1], axis=1)
        V[~np.isfinite(V)] = 0.0  # states outside the region are never reached
    verts = np.array(region.states, dtype=np.int64)
    return ValueTable(verts, V[verts - 1])


def _dnf(names, table):
    """Sum-of-minterms expression for a truth table over ``names``."""
    k = len(names)
    on = np.flatnonzero(table)
    if on.size == 0:
        return "0"
    if on.size == table.size:
        return "1"
    terms = []
    for code in on:
        lits = [(name if (code >> (k - 1 - j)) & 1 else "!" + name)
                for j, name in enumerate(names)]
        terms.append(" & ".join(lits))
    return " | ".join(f"({t})" for t in terms)


def random_network(rng: np.random.Generator, n: int, m: int, *, constrained: bool = False,
                   cost_range: tuple[int, int] = (-5, 5),
                   state_keep: float = 0.75, input_restrict: float = 0.5) -> BooleanNetwork:
    """Network with uniform random truth tables and integer table costs.

    With ``constrained`` set, each state is allowed with probability
    ``state_keep`` and each allowed state has its inputs narrowed to a random
    non-empty subset with probability ``input_restrict``.  The resulting
    problem may be infeasible.
    """
    states = tuple(f"x{i + 1}" for i in range(n))
    inputs = tuple(f"u{j + 1}" for j in range(m))
    names = states + inputs
    funcs = tuple(_dnf(names, rng.integers(0, 2, size=1 << (n + m))) for _ in range(n))
    N, M = 1 << n, 1 << m
    lo, hi = cost_range
    cost = TableCost(tuple(rng.integers(lo, hi + 1, size=N * M).astype(float)))
    cons = ConstraintSpec()
    if constrained:
        keep = [x for x in range(1, N + 1) if rng.random() < state_keep]
        if not keep:
            keep = [int(rng.integers(1, N + 1))]
        allowed_inputs = {}
        for x in keep:
            if M > 1 and rng.random() < input_restrict:
                size = int(rng.integers(1, M))
                allowed_inputs[x] = frozenset(int(u) for u in rng.choice(
                    np.arange(1, M + 1), size=size, replace=False))
        cons = ConstraintSpec(frozenset(keep), allowed_inputs)
    return BooleanNetwork(states, inputs, funcs, cost, cons)


def random_feasible_network(rng: np.random.Generator, n: int, m: int, *,
                            constrained: bool = False, max_tries: int = 1000,
                            **kwargs) -> BooleanNetwork:
    """Draw from :func:`random_network` until the feasible region is non-empty."""
    for _ in range(max_tries):
        net = random_network(rng, n, m, constrained=constrained, **kwargs)
        if feasible_region(build_assr(net), net.constraints).is_feasible:
            return net
    raise RuntimeError("could not draw a feasible instance")
