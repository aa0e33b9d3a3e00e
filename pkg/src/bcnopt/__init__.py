"""Discounted-cost optimal control of Boolean control networks.

Typical use::

    from bcnopt import load_network, build_assr, feasible_region, build_stg, madani

    net = load_network("ara.json")
    assr = build_assr(net)
    region = feasible_region(assr, net.constraints)
    graph = build_stg(assr, net.cost, region)
    values = madani(graph, 0.5)
"""

from .errors import (BCNError, DimensionError, ExprSyntaxError, InfeasibleProblemError,
                     NetworkFormatError, OracleRefusedError, UnboundVariableError,
                     ValidationError)
from .expr import eval_expr, parse_expr, structure_matrix
from .network import (Assr, BooleanNetwork, ConstraintSpec, LinearCost, Region, TableCost,
                      build_assr, cost_table, feasible_region, stage_cost)
from .serialization import load_network, save_network
from .solvers import (Policy, SolverConfig, ValueTable, evaluate_policy_exact, extract_policy,
                      feedback_matrix, madani, rollout, value_iteration)
from .stg import TransitionGraph, admissible_inputs, build_stg, to_dot
from .stp import (CanonicalVector, LogicalMatrix, decode_state, delta, encode_state,
                  stp_canonical, stp_logical)

__version__ = "0.1.0"
