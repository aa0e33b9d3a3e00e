"""
The ara operon benchmark
========================

Loads the bundled 9-state, 4-input network, solves it exactly and compares
value iteration sweeps at three thresholds.
"""

import time

import numpy as np

from bcnopt import build_assr, build_stg, feasible_region, madani, value_iteration
from bcnopt.cli import load_benchmark

net, expected = load_benchmark()
lam, x0 = expected["lambda"], expected["x0"]
print(f"n={net.n}, m={net.m}, N={net.N}, M={net.M}")

t = time.perf_counter()
assr = build_assr(net)
graph = build_stg(assr, net.cost, feasible_region(assr))
print(f"graph: {graph.num_vertices} vertices, {graph.num_edges} edges "
      f"({time.perf_counter() - t:.3f} s)")

###############################################################################
# Exact optimum.

t = time.perf_counter()
v = madani(graph, lam)
print(f"v*(x0) = {v[x0]:.6g} in {time.perf_counter() - t:.3f} s")
print("distinct optimal values:", np.unique(np.round(v.values, 6))[:10], "...")

###############################################################################
# Value iteration from zero, Gauss-Seidel order. The guaranteed gap to v* is
# theta * lam / (1 - lam).

for theta in (0.1, 0.01, 0.001):
    res = value_iteration(graph, lam, theta)
    err = np.max(np.abs(res.values.values - v.values))
    print(f"theta={theta}: {res.iterations} sweeps, max error {err:.2e}, "
          f"bound {theta * lam / (1 - lam):.2e}")

###############################################################################
# Sweep-by-sweep change for a tight threshold: geometric decay at rate lam.

res = value_iteration(graph, lam, 1e-9, sweep="jacobi")
psi = np.array(res.changes)
print("psi:", np.array2string(psi[:12], precision=3))
print("ratios:", np.array2string(psi[1:12] / psi[:11], precision=3))
