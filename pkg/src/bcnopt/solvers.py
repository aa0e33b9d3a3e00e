"""Discounted-cost optimal control on a state transition graph.

Two solvers are provided:

* :func:`value_iteration` repeatedly applies the Bellman update until the
  largest per-sweep change falls below a threshold.  The default sweep is
  in-place (Gauss-Seidel) over the vertices in ascending state order.
* :func:`madani` computes the exact optimum of a deterministic MDP in
  ``O(|V| |E|)`` time from minimal ``k``-edge discounted path costs.

Both return a :class:`ValueTable`; :func:`extract_policy` turns values into a
greedy :class:`Policy`, and :func:`feedback_matrix` into the logical matrix
``K`` of the state feedback law ``u = K x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ValidationError
from .network import Assr, Region, StageCost, cost_table
from .stg import TransitionGraph
from .stp import LogicalMatrix

__all__ = [
    "SolverConfig",
    "ValueTable",
    "Policy",
    "ValueIterationResult",
    "MadaniWorkspace",
    "RolloutResult",
    "value_iteration",
    "madani",
    "extract_policy",
    "feedback_matrix",
    "evaluate_policy_exact",
    "bellman_residual",
    "rollout",
    "rollout_horizon",
]


@dataclass(frozen=True)
class SolverConfig:
    lam: float
    theta: float = 1e-3
    max_iterations: int = 10**6

    def __post_init__(self):
        _check_lambda(self.lam)
        if not self.theta >= 0:
            raise ValidationError(f"theta must be non-negative, got {self.theta}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be positive")


def _check_lambda(lam):
    if not 0.0 < lam < 1.0:
        raise ValidationError(f"discount factor must lie in (0, 1), got {lam}")


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Values aligned with the ascending vertex list of a graph."""

    vertices: np.ndarray
    values: np.ndarray

    def __getitem__(self, x: int) -> float:
        p = int(np.searchsorted(self.vertices, x))
        if p == self.vertices.size or self.vertices[p] != x:
            raise KeyError(f"state {x} has no value")
        return float(self.values[p])

    def __len__(self):
        return int(self.vertices.size)

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(v) for x, v in zip(self.vertices, self.values)}


@dataclass(frozen=True, eq=False)
class Policy:
    """Stationary policy: ``inputs[p]`` is applied at state ``vertices[p]``."""

    vertices: np.ndarray
    inputs: np.ndarray

    def __getitem__(self, x: int) -> int:
        p = int(np.searchsorted(self.vertices, x))
        if p == self.vertices.size or self.vertices[p] != x:
            raise KeyError(f"state {x} is outside the policy's domain")
        return int(self.inputs[p])

    def __len__(self):
        return int(self.vertices.size)

    def as_dict(self) -> dict[int, int]:
        return {int(x): int(u) for x, u in zip(self.vertices, self.inputs)}


@dataclass(frozen=True, eq=False)
class ValueIterationResult:
    values: ValueTable
    iterations: int
    converged: bool
    changes: list[float] = field(default_factory=list)
    """Largest absolute value change of every sweep, in order."""


@dataclass(frozen=True, eq=False)
class MadaniWorkspace:
    """``d[k, p]``: minimal discounted cost of a ``k``-edge walk from vertex ``p``
    (``k = 0..|V|``); ``y[k, p]``: the same recursion seeded with ``y[0]``
    (``k = 0..|V|-1``)."""

    d: np.ndarray
    y: np.ndarray


@dataclass(frozen=True, eq=False)
class RolloutResult:
    states: list[int]
    inputs: list[int]
    stage_costs: list[float]
    discounted_cost: float
    horizon: int


def _bellman_sweep(graph, V, lam):
    """Synchronous Bellman update of every vertex."""
    q = graph.weight + lam * V[graph.succ_pos]
    return np.minimum.reduceat(q, graph.indptr[:-1])


def value_iteration(graph: TransitionGraph, lam: float, theta: float = 1e-3, *,
                    max_iterations: int = 10**6, initial=None,
                    sweep: Literal["gauss-seidel", "jacobi"] = "gauss-seidel",
                    ) -> ValueIterationResult:
    """Approximate the optimal value function by value iteration.

    Parameters
    ----------
    graph : TransitionGraph
    lam : float
        Discount factor in (0, 1).
    theta : float
        Stop as soon as a sweep changes no value by ``theta`` or more.
    max_iterations : int
        Hard cap on the number of sweeps.  With ``theta = 0`` the loop may
        otherwise never end.
    initial : array_like, optional
        Starting values aligned with ``graph.vertices``; zeros by default.
    sweep : {"gauss-seidel", "jacobi"}
        In-place updates in ascending vertex order, or synchronous updates
        from the previous sweep's values.

    Returns
    -------
    ValueIterationResult
        ``converged`` is false when the cap was hit first.
    """
    SolverConfig(lam, theta, max_iterations)
    nv = graph.num_vertices
    V = np.zeros(nv) if initial is None else np.array(initial, dtype=float)
    if V.shape != (nv,):
        raise ValidationError(f"initial values must have shape ({nv},)")

    changes = []
    if sweep == "jacobi":
        while len(changes) < max_iterations:
            new = _bellman_sweep(graph, V, lam)
            psi = float(np.max(np.abs(new - V)))
            V = new
            changes.append(psi)
            if psi < theta:
                break
    elif sweep == "gauss-seidel":
        rows = [(graph.succ_pos[a:b], graph.weight[a:b])
                for a, b in zip(graph.indptr[:-1], graph.indptr[1:])]
        while len(changes) < max_iterations:
            psi = 0.0
            for p, (succ, w) in enumerate(rows):
                old = V[p]
                V[p] = (w + lam * V[succ]).min()
                psi = max(psi, abs(old - V[p]))
            changes.append(psi)
            if psi < theta:
                break
    else:
        raise ValueError(f"unknown sweep {sweep!r}")

    converged = bool(changes) and changes[-1] < theta
    return ValueIterationResult(ValueTable(graph.vertices, V), len(changes), converged, changes)


def madani(graph: TransitionGraph, lam: float, *, return_workspace: bool = False):
    """Exact optimal values via Madani's algorithm for discounted DMDPs.

    With ``n = |V|``:

    1. ``d_0 = 0`` and ``d_k(x) = min_{(x,x')} w(x,x') + lam d_{k-1}(x')``
       for ``k = 1..n``;
    2. ``y_0(x) = max_{0<=k<n} (d_n(x) - lam^(n-k) d_k(x)) / (1 - lam^(n-k))``;
    3. ``y_k`` follows the recursion of step 1 seeded with ``y_0``, for
       ``k = 1..n-1``;
    4. ``v*(x) = min_{0<=k<n} y_k(x)``.

    Returns the :class:`ValueTable`, or ``(ValueTable, MadaniWorkspace)``
    when ``return_workspace`` is set.  Without the workspace only a running
    minimum over ``y_k`` is kept.
    """
    _check_lambda(lam)
    n = graph.num_vertices
    d = np.zeros((n + 1, n))
    for k in range(1, n + 1):
        d[k] = _bellman_sweep(graph, d[k - 1], lam)

    span = n - np.arange(n)  # n - k for k = 0..n-1
    disc = lam ** span.astype(float)
    y0 = ((d[n][None, :] - disc[:, None] * d[:n]) / (1.0 - disc)[:, None]).max(axis=0)

    if return_workspace:
        y = np.empty((n, n))
        y[0] = y0
        for k in range(1, n):
            y[k] = _bellman_sweep(graph, y[k - 1], lam)
        values = y.min(axis=0)
        return ValueTable(graph.vertices, values), MadaniWorkspace(d, y)

    yk, values = y0, y0.copy()
    for _ in range(1, n):
        yk = _bellman_sweep(graph, yk, lam)
        np.minimum(values, yk, out=values)
    return ValueTable(graph.vertices, values)


def bellman_residual(graph: TransitionGraph, values: ValueTable, lam: float) -> float:
    """``max_x |V(x) - min_{(x,x')} (w + lam V(x'))|``."""
    V = np.asarray(values.values, dtype=float)
    return float(np.max(np.abs(V - _bellman_sweep(graph, V, lam))))


def extract_policy(graph: TransitionGraph, values: ValueTable, lam: float,
                   rtol: float = 1e-12) -> Policy:
    """Greedy policy ``argmin_u g(x, u) + lam V(L u x)``.

    Edges whose Q-value is within ``rtol * (1 + max|Q|)`` of the best count
    as ties; the smallest input among them wins.
    """
    V = np.asarray(values.values, dtype=float)
    q = graph.weight + lam * V[graph.succ_pos]
    starts = graph.indptr[:-1]
    qmin = np.minimum.reduceat(q, starts)
    tol = rtol * (1.0 + float(np.max(np.abs(q))))
    tie = q <= qmin[graph.sources] + tol
    big = np.iinfo(np.int64).max
    inputs = np.minimum.reduceat(np.where(tie, graph.best_input, big), starts)
    return Policy(graph.vertices, inputs.astype(np.int64))


def feedback_matrix(policy: Policy, M: int, N: int) -> LogicalMatrix:
    """Logical matrix ``K`` in ``L_{M x N}`` with ``Col_i(K) = delta_M^{pi(i)}``.

    Columns of states outside the policy's domain are set to ``delta_M^1``.
    """
    cols = np.ones(N, dtype=np.int64)
    cols[np.asarray(policy.vertices) - 1] = policy.inputs
    return LogicalMatrix(M, cols)


def evaluate_policy_exact(graph: TransitionGraph, policy: Policy, lam: float) -> ValueTable:
    """Exact discounted value ``v_pi`` of a stationary policy.

    Under a fixed policy each state has a single successor, so every
    trajectory runs into a cycle.  A cycle of length ``l`` with discounted
    cost ``C`` gives its entry state the value ``C / (1 - lam**l)``; all other
    values follow from ``v(x) = g(x, pi(x)) + lam v(x')`` by back-substitution.
    Each state is visited once.
    """
    _check_lambda(lam)
    region = graph.region
    nv = graph.num_vertices
    pos_of = {int(x): p for p, x in enumerate(graph.vertices)}
    nxt = np.empty(nv, dtype=np.int64)
    cost = np.empty(nv)
    for p, x in enumerate(graph.vertices):
        u = policy[int(x)]
        if not region.allowed[x - 1, u - 1]:
            raise ValidationError(f"policy input {u} is not admissible at state {x}")
        nxt[p] = pos_of[graph.successor(int(x), u)]
        cost[p] = graph.cost(int(x), u)

    value = np.empty(nv)
    state = np.zeros(nv, dtype=np.int8)  # 0 new, 1 on current path, 2 done
    for start in range(nv):
        if state[start]:
            continue
        path = []
        p = start
        while state[p] == 0:
            state[p] = 1
            path.append(p)
            p = nxt[p]
        if state[p] == 1:
            # closed a new cycle at p
            j = path.index(p)
            cycle = path[j:]
            total = 0.0
            for t, c in enumerate(cycle):
                total += lam ** t * cost[c]
            value[p] = total / (1.0 - lam ** len(cycle))
            state[p] = 2
            for c in reversed(cycle[1:]):
                value[c] = cost[c] + lam * value[nxt[c]]
                state[c] = 2
            path = path[:j]
        for c in reversed(path):
            value[c] = cost[c] + lam * value[nxt[c]]
            state[c] = 2
    return ValueTable(graph.vertices, value)


def rollout_horizon(lam: float, cost_bound: float, epsilon: float) -> int:
    """Smallest ``T`` with ``lam**T * cost_bound / (1 - lam) < epsilon``."""
    _check_lambda(lam)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    tail = cost_bound / (1.0 - lam)
    if tail < epsilon:
        return 0
    T = max(0, math.floor(math.log(epsilon / tail) / math.log(lam)))
    while lam ** T * tail >= epsilon:
        T += 1
    return T


def rollout(assr: Assr, cost: StageCost | np.ndarray, K: LogicalMatrix, x0: int,
            lam: float, *, horizon: int | None = None, epsilon: float | None = None,
            region: Region | None = None) -> RolloutResult:
    """Simulate the closed loop ``u(t) = K x(t)`` from ``x0``.

    Exactly one of ``horizon`` (number of steps) and ``epsilon`` must be
    given.  In epsilon mode the horizon is chosen so that the neglected tail
    of the discounted sum is below ``epsilon``, using the largest ``|g|``
    over the admissible pairs as the cost bound.

    When ``region`` is supplied, ``x0`` must lie in it and every visited
    state and applied input is checked against it.
    """
    _check_lambda(lam)
    if (horizon is None) == (epsilon is None):
        raise ValueError("give exactly one of horizon and epsilon")
    costs = cost if isinstance(cost, np.ndarray) else cost_table(cost, assr.n, assr.m)
    if K.shape != (assr.M, assr.N):
        raise ValidationError(f"feedback matrix must be {assr.M} x {assr.N}, got {K.shape}")
    if not 1 <= x0 <= assr.N:
        raise ValueError(f"initial state {x0} outside [1, {assr.N}]")
    if region is not None and not region.contains(x0):
        raise ValueError(f"initial state {x0} violates the state constraints")
    if horizon is None:
        mask = region.allowed if region is not None else np.ones(costs.shape, dtype=bool)
        bound = float(np.max(np.abs(costs[mask]), initial=0.0))
        horizon = rollout_horizon(lam, bound, epsilon)
    if horizon < 0:
        raise ValueError("horizon must be non-negative")

    states, inputs, stage = [x0], [], []
    total, disc, x = 0.0, 1.0, x0
    for _ in range(horizon):
        u = int(K.indices[x - 1])
        if region is not None and not region.allowed[x - 1, u - 1]:
            raise RuntimeError(f"feedback law leaves the feasible region at state {x} (input {u})")
        c = float(costs[x - 1, u - 1])
        total += disc * c
        disc *= lam
        x = int(assr.succ[x - 1, u - 1])
        states.append(x)
        inputs.append(u)
        stage.append(c)
    return RolloutResult(states, inputs, stage, total, horizon)
