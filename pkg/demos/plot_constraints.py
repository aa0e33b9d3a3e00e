"""
State and input constraints
===========================

Random network with a forbidden set of states. Pruning finds the largest
set of states that can be kept admissible forever; the optimal feedback
then never leaves it.
"""

import numpy as np

from bcnopt import ConstraintSpec, build_assr, build_stg, feasible_region
from bcnopt import extract_policy, feedback_matrix, madani, rollout
from bcnopt.errors import InfeasibleProblemError
from bcnopt.oracle import enumerate_optimal, random_network

rng = np.random.default_rng(5)
net = random_network(rng, 3, 2, constrained=True, state_keep=0.7)
assr = build_assr(net)
print("allowed states:", sorted(net.constraints.allowed_states))
print("input restrictions:", {x: sorted(u) for x, u in net.constraints.allowed_inputs.items()})

region = feasible_region(assr, net.constraints)
print("after pruning:", region.states)

###############################################################################
# Solve, and check against brute-force enumeration of all feasible policies.

lam = 0.6
graph = build_stg(assr, net.cost, region)
v = madani(graph, lam)
ref, _ = enumerate_optimal(graph, lam)
print("v* =", np.round(v.values, 4))
print("max gap to enumeration:", np.max(np.abs(v.values - ref.values)))

K = feedback_matrix(extract_policy(graph, v, lam), assr.M, assr.N)
for x0 in region.states:
    run = rollout(assr, net.cost, K, x0, lam, horizon=1000, region=region)
    print(x0, "->", run.states[:6], "...")

###############################################################################
# A constraint set with no way to stay inside is rejected up front.

tight = feasible_region(assr, ConstraintSpec(frozenset({1})))
try:
    build_stg(assr, net.cost, tight)
except InfeasibleProblemError as exc:
    print("rejected:", exc)
