"""Boolean control networks and their algebraic state-space representation.

A network with ``n`` state variables and ``m`` inputs evolves as
``x(t+1) = L u(t) x(t)`` with ``L`` in ``L_{N x MN}``, ``N = 2**n`` and
``M = 2**m``.  Column ``(j-1) N + i`` of ``L`` is the successor of state
``delta_N^i`` under input ``delta_M^j``.

Public functions take and return 1-based state and input indices.  The
numpy tables held by :class:`Assr` and returned by :func:`cost_table` are
0-based and laid out as ``table[x - 1, u - 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import ValidationError
from .expr import BoolExpr, eval_array, expr_variables, format_expr, parse_expr
from .stp import LogicalMatrix

__all__ = [
    "LinearCost",
    "TableCost",
    "StageCost",
    "ConstraintSpec",
    "BooleanNetwork",
    "Assr",
    "Region",
    "build_assr",
    "bit_table",
    "cost_table",
    "stage_cost",
    "feasible_region",
]


@dataclass(frozen=True)
class LinearCost:
    """``g(x, u) = A . X + B . U`` on the 0/1 bit vectors of state and input."""

    A: tuple[float, ...]
    B: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(float(a) for a in self.A))
        object.__setattr__(self, "B", tuple(float(b) for b in self.B))
        if not all(np.isfinite(self.A + self.B)):
            raise ValidationError("stage cost weights must be finite")

    def bound(self) -> float:
        """Upper bound on ``|g|`` over all state/input pairs."""
        return float(sum(map(abs, self.A)) + sum(map(abs, self.B)))


@dataclass(frozen=True)
class TableCost:
    """Explicit stage costs, ``values[(j-1) N + i - 1] = g(delta_N^i, delta_M^j)``."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not all(np.isfinite(self.values)):
            raise ValidationError("stage cost values must be finite")

    def bound(self) -> float:
        return float(max(map(abs, self.values), default=0.0))


StageCost = Union[LinearCost, TableCost]


@dataclass(frozen=True)
class ConstraintSpec:
    """State constraints ``C_x`` and state-dependent input constraints ``C_u``.

    ``allowed_states=None`` means every state is allowed; a state missing from
    ``allowed_inputs`` may use every input.
    """

    allowed_states: frozenset[int] | None = None
    allowed_inputs: Mapping[int, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.allowed_states is not None:
            object.__setattr__(self, "allowed_states", frozenset(self.allowed_states))
            if not self.allowed_states:
                raise ValidationError("allowed_states must not be empty")
        inputs = {int(k): frozenset(v) for k, v in self.allowed_inputs.items()}
        for x, us in inputs.items():
            if not us:
                raise ValidationError(f"allowed_inputs for state {x} is empty")
            if self.allowed_states is not None and x not in self.allowed_states:
                raise ValidationError(f"allowed_inputs given for disallowed state {x}")
        object.__setattr__(self, "allowed_inputs", inputs)

    @property
    def is_trivial(self) -> bool:
        return self.allowed_states is None and not self.allowed_inputs

    def mask(self, N: int, M: int) -> np.ndarray:
        """Boolean ``(N, M)`` array of admissible (state, input) pairs."""
        ok = np.zeros((N, M), dtype=bool)
        states = range(1, N + 1) if self.allowed_states is None else self.allowed_states
        for x in states:
            if not 1 <= x <= N:
                raise ValidationError(f"state index {x} outside [1, {N}]")
            us = self.allowed_inputs.get(x)
            if us is None:
                ok[x - 1, :] = True
            else:
                for u in us:
                    if not 1 <= u <= M:
                        raise ValidationError(f"input index {u} outside [1, {M}]")
                    ok[x - 1, u - 1] = True
        return ok


@dataclass(frozen=True, eq=False)
class BooleanNetwork:
    """A BCN: ``x_i(t+1) = f_i(x(t), u(t))`` for each state variable ``x_i``.

    ``functions[i]`` drives ``state_names[i]``.  Expressions may be given as
    strings and are parsed on construction.
    """

    state_names: tuple[str, ...]
    input_names: tuple[str, ...]
    functions: tuple[BoolExpr, ...]
    cost: StageCost | None = None
    constraints: ConstraintSpec = field(default_factory=ConstraintSpec)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "state_names", tuple(self.state_names))
        set_(self, "input_names", tuple(self.input_names))
        set_(self, "functions", tuple(parse_expr(f) if isinstance(f, str) else f
                                      for f in self.functions))
        self._validate()

    def _validate(self):
        n, m = self.n, self.m
        if n < 1:
            raise ValidationError("a network needs at least one state variable")
        names = self.state_names + self.input_names
        dup = sorted({s for s in names if names.count(s) > 1})
        if dup:
            raise ValidationError(f"duplicate variable names: {', '.join(dup)}")
        if len(self.functions) != n:
            raise ValidationError(f"expected {n} functions, got {len(self.functions)}")
        known = set(names)
        for name, f in zip(self.state_names, self.functions):
            unknown = [v for v in expr_variables(f) if v not in known]
            if unknown:
                raise ValidationError(
                    f"function of {name!r} references undeclared {', '.join(unknown)}")
        if isinstance(self.cost, LinearCost):
            if len(self.cost.A) != n or len(self.cost.B) != m:
                raise ValidationError(
                    f"linear cost needs {n} state and {m} input weights, "
                    f"got {len(self.cost.A)} and {len(self.cost.B)}")
        elif isinstance(self.cost, TableCost):
            if len(self.cost.values) != self.N * self.M:
                raise ValidationError(
                    f"cost table needs {self.N * self.M} entries, got {len(self.cost.values)}")
        self.constraints.mask(self.N, self.M)

    @property
    def n(self) -> int:
        return len(self.state_names)

    @property
    def m(self) -> int:
        return len(self.input_names)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def M(self) -> int:
        return 1 << self.m

    def function_text(self) -> dict[str, str]:
        return {name: format_expr(f) for name, f in zip(self.state_names, self.functions)}

    def __eq__(self, other):
        if not isinstance(other, BooleanNetwork):
            return NotImplemented
        return (self.state_names == other.state_names
                and self.input_names == other.input_names
                and self.functions == other.functions
                and self.cost == other.cost
                and self.constraints == other.constraints)


def bit_table(k: int) -> np.ndarray:
    """``(2**k, k)`` 0/1 array; row ``i - 1`` is ``decode_state(delta^i, k)``."""
    codes = np.arange(1 << k)
    return ((codes[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Assr:
    """Algebraic state-space representation ``x(t+1) = L u(t) x(t)``.

    ``succ[x - 1, u - 1]`` is the 1-based successor of state ``x`` under
    input ``u``.
    """

    n: int
    m: int
    succ: np.ndarray

    def __post_init__(self):
        succ = np.array(self.succ, dtype=np.int64)
        if succ.shape != (self.N, self.M):
            raise ValidationError(f"successor table must have shape {(self.N, self.M)}")
        if succ.min() < 1 or succ.max() > self.N:
            raise ValidationError("successor indices must lie in [1, N]")
        succ.setflags(write=False)
        object.__setattr__(self, "succ", succ)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def M(self) -> int:
        return 1 << self.m

    @property
    def next(self) -> np.ndarray:
        """Flat table; entry ``(j-1) N + i - 1`` is the successor of ``(i, j)``."""
        return self.succ.T.reshape(-1)

    def successor(self, x: int, u: int) -> int:
        return int(self.succ[x - 1, u - 1])

    def to_logical_matrix(self) -> LogicalMatrix:
        """The structure matrix ``L`` in ``L_{N x MN}``."""
        return LogicalMatrix(self.N, self.next)

    def __eq__(self, other):
        if not isinstance(other, Assr):
            return NotImplemented
        return self.n == other.n and self.m == other.m and np.array_equal(self.succ, other.succ)


def build_assr(net: BooleanNetwork) -> Assr:
    """Build ``L`` by evaluating every ``f_i`` on every (state, input) pair."""
    n, m, N, M = net.n, net.m, net.N, net.M
    xs = bit_table(n).astype(bool)
    us = bit_table(m).astype(bool)
    env = {name: np.broadcast_to(xs[:, k, None], (N, M))
           for k, name in enumerate(net.state_names)}
    env.update({name: np.broadcast_to(us[None, :, k], (N, M))
                for k, name in enumerate(net.input_names)})
    index = np.zeros((N, M), dtype=np.int64)
    for f in net.functions:
        value = np.broadcast_to(eval_array(f, env), (N, M))
        index = (index << 1) | value.astype(np.int64)
    return Assr(n, m, index + 1)


def cost_table(cost: StageCost, n: int, m: int) -> np.ndarray:
    """``(N, M)`` float array of stage costs ``g(x, u)``."""
    N, M = 1 << n, 1 << m
    if isinstance(cost, LinearCost):
        gx = bit_table(n) @ np.asarray(cost.A, dtype=float)
        gu = bit_table(m) @ np.asarray(cost.B, dtype=float)
        return gx[:, None] + gu[None, :]
    if isinstance(cost, TableCost):
        return np.asarray(cost.values, dtype=float).reshape(M, N).T.copy()
    raise TypeError(f"unsupported cost specification {type(cost).__name__}")


def stage_cost(cost: StageCost, x: int, u: int, n: int, m: int) -> float:
    """Stage cost ``g(delta_N^x, delta_M^u)``."""
    N, M = 1 << n, 1 << m
    if not (1 <= x <= N and 1 <= u <= M):
        raise ValueError(f"(x={x}, u={u}) outside [1, {N}] x [1, {M}]")
    if isinstance(cost, TableCost):
        return cost.values[(u - 1) * N + x - 1]
    xbits = [(x - 1) >> (n - 1 - k) & 1 for k in range(n)]
    ubits = [(u - 1) >> (m - 1 - k) & 1 for k in range(m)]
    return float(np.dot(cost.A, xbits) + (np.dot(cost.B, ubits) if m else 0.0))


@dataclass(frozen=True, eq=False)
class Region:
    """Pruned constraint set: the states that can evolve forever.

    ``allowed[x - 1, u - 1]`` is true iff ``u`` is admissible at ``x`` and its
    successor stays in ``states``.  Every state in ``states`` has at least one
    admissible input.
    """

    allowed: np.ndarray

    def __post_init__(self):
        a = np.array(self.allowed, dtype=bool)
        a.setflags(write=False)
        object.__setattr__(self, "allowed", a)

    @property
    def states(self) -> tuple[int, ...]:
        return tuple(int(x) + 1 for x in np.flatnonzero(self.allowed.any(axis=1)))

    @property
    def is_feasible(self) -> bool:
        return bool(self.allowed.any())

    def contains(self, x: int) -> bool:
        return 1 <= x <= self.allowed.shape[0] and bool(self.allowed[x - 1].any())

    def inputs(self, x: int) -> tuple[int, ...]:
        return tuple(int(u) + 1 for u in np.flatnonzero(self.allowed[x - 1]))

    def as_constraints(self) -> ConstraintSpec:
        states = self.states
        return ConstraintSpec(frozenset(states), {x: frozenset(self.inputs(x)) for x in states})


def feasible_region(assr: Assr, cons: ConstraintSpec | None = None) -> Region:
    """Greatest subset of ``C_x`` closed under some admissible input.

    States whose every admissible input leads outside the current set are
    removed repeatedly until nothing changes.  An empty result means the
    control problem is infeasible.
    """
    cons = cons or ConstraintSpec()
    ok = cons.mask(assr.N, assr.M)
    alive = ok.any(axis=1)
    while True:
        ok &= alive[assr.succ - 1]
        still = ok.any(axis=1)
        if np.array_equal(still, alive):
            return Region(ok)
        alive = still
