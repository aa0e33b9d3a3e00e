"""State transition graph of a constrained Boolean control network.

Vertices are the states of the pruned feasible region, ordered by ascending
state index.  For every vertex ``x`` and every distinct successor ``x'``
reachable through an admissible input there is exactly one edge, weighted by
the cheapest enabling input::

    w(x, x')  = min { g(x, u) : u in U_xx' }
    u*(x, x') = smallest u attaining that minimum

Edges are stored in compressed sparse row form: the out-edges of the vertex
at position ``p`` occupy ``indptr[p]:indptr[p + 1]`` in ``succ_pos``,
``weight`` and ``best_input``, sorted by successor index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProblemError
from .network import Assr, Region, StageCost, cost_table

__all__ = ["TransitionGraph", "build_stg", "admissible_inputs", "to_dot"]


@dataclass(frozen=True, eq=False)
class TransitionGraph:
    """Weighted STG ``G = (V, E)`` plus the tables it was built from.

    Attributes
    ----------
    vertices : ndarray of int
        1-based state indices in ascending order.
    indptr : ndarray of int
        CSR row pointer, length ``len(vertices) + 1``.
    succ_pos : ndarray of int
        Position (into ``vertices``) of each edge's head.
    weight : ndarray of float
        Edge weights ``w(x, x')``.
    best_input : ndarray of int
        1-based minimising input ``u*(x, x')`` of each edge.
    assr, costs, region
        The transition table, ``(N, M)`` stage-cost array and pruned region;
        kept so that arbitrary (state, input) pairs can be evaluated later.
    pairs_examined : int
        Number of (state, input) pairs inspected during construction.
    """

    vertices: np.ndarray
    indptr: np.ndarray
    succ_pos: np.ndarray
    weight: np.ndarray
    best_input: np.ndarray
    assr: Assr
    costs: np.ndarray
    region: Region
    pairs_examined: int

    @property
    def num_vertices(self) -> int:
        return int(self.vertices.size)

    @property
    def num_edges(self) -> int:
        return int(self.succ_pos.size)

    @property
    def successors(self) -> np.ndarray:
        """1-based state index of each edge's head."""
        return self.vertices[self.succ_pos]

    @property
    def sources(self) -> np.ndarray:
        """Position of each edge's tail."""
        return np.repeat(np.arange(self.num_vertices), np.diff(self.indptr))

    def position(self, x: int) -> int:
        """Position of state ``x`` in :attr:`vertices`."""
        p = int(np.searchsorted(self.vertices, x))
        if p == self.vertices.size or self.vertices[p] != x:
            raise KeyError(f"state {x} is not a vertex of the graph")
        return p

    def out_edges(self, x: int) -> list[tuple[int, float, int]]:
        """``(successor, weight, best_input)`` triples leaving state ``x``."""
        p = self.position(x)
        sl = slice(self.indptr[p], self.indptr[p + 1])
        return [(int(s), float(w), int(u)) for s, w, u in
                zip(self.vertices[self.succ_pos[sl]], self.weight[sl], self.best_input[sl])]

    def successor(self, x: int, u: int) -> int:
        return self.assr.successor(x, u)

    def cost(self, x: int, u: int) -> float:
        return float(self.costs[x - 1, u - 1])


def build_stg(assr: Assr, cost: StageCost | np.ndarray, region: Region) -> TransitionGraph:
    """Build the STG over ``region``.

    Every admissible (state, input) pair is examined exactly once; parallel
    transitions are collapsed to their cheapest input.

    Raises
    ------
    InfeasibleProblemError
        If ``region`` holds no state.
    """
    if not region.is_feasible:
        raise InfeasibleProblemError("the feasible region is empty")
    costs = np.asarray(cost, dtype=float) if isinstance(cost, np.ndarray) \
        else cost_table(cost, assr.n, assr.m)
    costs.setflags(write=False)

    x0, u0 = np.nonzero(region.allowed)  # row-major: ascending x, then u
    nxt = assr.succ[x0, u0]
    g = costs[x0, u0]
    # group by (x, x'); inside a group the cheapest, then smallest, u comes first
    order = np.lexsort((u0, g, nxt, x0))
    x0, u0, nxt, g = x0[order], u0[order], nxt[order], g[order]
    first = np.ones(x0.size, dtype=bool)
    first[1:] = (x0[1:] != x0[:-1]) | (nxt[1:] != nxt[:-1])

    vertices = np.array(region.states, dtype=np.int64)
    pos_of = np.full(assr.N + 1, -1, dtype=np.int64)
    pos_of[vertices] = np.arange(vertices.size)
    tail = pos_of[x0[first] + 1]
    indptr = np.zeros(vertices.size + 1, dtype=np.int64)
    np.add.at(indptr, tail + 1, 1)
    indptr = np.cumsum(indptr)

    arrays = dict(vertices=vertices, indptr=indptr, succ_pos=pos_of[nxt[first]],
                  weight=g[first].astype(float), best_input=u0[first] + 1)
    for a in arrays.values():
        a.setflags(write=False)
    return TransitionGraph(**arrays, assr=assr, costs=costs, region=region,
                           pairs_examined=int(order.size))


def admissible_inputs(assr: Assr, region: Region, x: int, x_next: int) -> frozenset[int]:
    """``U_xx'``: admissible inputs at ``x`` that lead to ``x_next``."""
    hits = region.allowed[x - 1] & (assr.succ[x - 1] == x_next)
    return frozenset(int(u) + 1 for u in np.flatnonzero(hits))


def to_dot(graph: TransitionGraph, name: str = "stg") -> str:
    """Graphviz rendering; edges are labelled ``"w/u*"``."""
    ident = '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'
    lines = [f"digraph {ident} {{"]
    for x in graph.vertices:
        lines.append(f'  {x} [label="{x}"];')
    for p, x in enumerate(graph.vertices):
        for e in range(graph.indptr[p], graph.indptr[p + 1]):
            y = graph.vertices[graph.succ_pos[e]]
            lines.append(f'  {x} -> {y} [label="{graph.weight[e]:.9g}/{graph.best_input[e]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
