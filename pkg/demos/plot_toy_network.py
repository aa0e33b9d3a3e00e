"""
A two-gene network, end to end
==============================

Builds a small controlled network from text, looks at its transition table
and solves the discounted problem with both solvers.
"""

import numpy as np

from bcnopt import BooleanNetwork, LinearCost, build_assr, build_stg, feasible_region
from bcnopt import extract_policy, feedback_matrix, madani, rollout, value_iteration

# x1 copies the input when x2 is on; x2 toggles
net = BooleanNetwork(
    state_names=("x1", "x2"),
    input_names=("u",),
    functions=("u & x2", "!x2"),
    cost=LinearCost(A=(3, 1), B=(2,)),
)
assr = build_assr(net)
print("successor table (rows: states, columns: inputs)")
print(assr.succ)

###############################################################################
# Without constraints every state is admissible. The graph keeps one edge per
# (state, successor) pair, labelled with the cheapest enabling input.

region = feasible_region(assr, net.constraints)
graph = build_stg(assr, net.cost, region)
for x in graph.vertices:
    print(x, graph.out_edges(int(x)))

###############################################################################
# Exact values first, then value iteration at a few thresholds.

lam = 0.8
v = madani(graph, lam)
print("v* =", v.values)
for theta in (1e-1, 1e-3, 1e-6):
    res = value_iteration(graph, lam, theta)
    gap = np.max(np.abs(res.values.values - v.values))
    print(f"theta={theta:g}: {res.iterations} sweeps, max gap {gap:.2e}")

###############################################################################
# The optimal stationary policy as a feedback matrix, and a closed-loop run.

policy = extract_policy(graph, v, lam)
K = feedback_matrix(policy, assr.M, assr.N)
print("K columns:", K.indices)
run = rollout(assr, net.cost, K, x0=4, lam=lam, epsilon=1e-6)
print("states visited:", run.states[:8], "...")
print(f"discounted cost {run.discounted_cost:.6f} vs v*(4) = {v[4]:.6f}")
