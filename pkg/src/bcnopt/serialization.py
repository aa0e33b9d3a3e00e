"""JSON network files and solver output files.

Network file::

    {
      "states": ["x1", "x2"],
      "inputs": ["u"],
      "functions": {"x1": "x2 & u", "x2": "!x1"},
      "cost": {"linear": {"A": [1, 0], "B": [2]}},      # or {"table": [...]}
      "constraints": {
        "allowed_states": [1, 2, 4],                      # or "forbidden_states"
        "allowed_inputs": {"1": [2]}
      }
    }

``cost`` and ``constraints`` are optional.  State and input indices are
1-based, with the first listed variable as the most significant bit.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from .errors import BCNError, ExprSyntaxError, NetworkFormatError, ValidationError
from .expr import parse_expr
from .network import BooleanNetwork, ConstraintSpec, LinearCost, TableCost
from .solvers import Policy, ValueTable
from .stp import LogicalMatrix

__all__ = [
    "network_from_dict",
    "network_to_dict",
    "load_network",
    "save_network",
    "solution_to_dict",
    "write_json",
    "load_feedback",
    "atomic_write_text",
    "fmt_float",
]


def _need(doc, key, kind, where="network"):
    if key not in doc:
        raise NetworkFormatError(f"{where}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise NetworkFormatError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _int_list(value, where):
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool)
                                              for v in value):
        raise NetworkFormatError(f"{where} must be a list of integers")
    return value


def _num_list(value, where):
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                              for v in value):
        raise NetworkFormatError(f"{where} must be a list of numbers")
    return value


def network_from_dict(doc: dict[str, Any]) -> BooleanNetwork:
    if not isinstance(doc, dict):
        raise NetworkFormatError("network: top level must be a JSON object")
    states = _need(doc, "states", list)
    inputs = doc.get("inputs", [])
    if not isinstance(inputs, list):
        raise NetworkFormatError("network: field 'inputs' must be list")
    for name in states + inputs:
        if not isinstance(name, str):
            raise NetworkFormatError(f"network: variable names must be strings, got {name!r}")
    funcs = _need(doc, "functions", dict)
    missing = [s for s in states if s not in funcs]
    if missing:
        raise NetworkFormatError(f"functions: no expression for {', '.join(map(repr, missing))}")
    extra = [k for k in funcs if k not in states]
    if extra:
        raise NetworkFormatError(f"functions: {', '.join(map(repr, extra))} is not a state")
    exprs = []
    for s in states:
        text = funcs[s]
        if not isinstance(text, str):
            raise NetworkFormatError(f"functions.{s}: expression must be a string")
        try:
            exprs.append(parse_expr(text))
        except ExprSyntaxError as exc:
            raise NetworkFormatError(f"functions.{s}: {exc}") from exc

    cost = None
    if doc.get("cost") is not None:
        c = doc["cost"]
        if not isinstance(c, dict) or len(c) != 1 or next(iter(c)) not in ("linear", "table"):
            raise NetworkFormatError("cost: expected {'linear': {...}} or {'table': [...]}")
        if "linear" in c:
            lin = c["linear"]
            if not isinstance(lin, dict):
                raise NetworkFormatError("cost.linear must be an object")
            A = _num_list(lin.get("A"), "cost.linear.A")
            B = _num_list(lin.get("B", []), "cost.linear.B")
            cost = LinearCost(tuple(A), tuple(B))
        else:
            cost = TableCost(tuple(_num_list(c["table"], "cost.table")))

    constraints = ConstraintSpec()
    if doc.get("constraints") is not None:
        constraints = _constraints_from_dict(doc["constraints"], len(states))

    return BooleanNetwork(tuple(states), tuple(inputs), tuple(exprs), cost, constraints)


def _constraints_from_dict(c, n):
    if not isinstance(c, dict):
        raise NetworkFormatError("constraints must be an object")
    unknown = set(c) - {"allowed_states", "forbidden_states", "allowed_inputs"}
    if unknown:
        raise NetworkFormatError(f"constraints: unknown field(s) {sorted(unknown)}")
    if "allowed_states" in c and "forbidden_states" in c:
        raise NetworkFormatError(
            "constraints: allowed_states and forbidden_states are mutually exclusive")
    N = 1 << n
    allowed = None
    if "allowed_states" in c:
        allowed = frozenset(_int_list(c["allowed_states"], "constraints.allowed_states"))
    elif "forbidden_states" in c:
        bad = set(_int_list(c["forbidden_states"], "constraints.forbidden_states"))
        outside = [x for x in bad if not 1 <= x <= N]
        if outside:
            raise ValidationError(f"forbidden state {outside[0]} outside [1, {N}]")
        allowed = frozenset(range(1, N + 1)) - bad
        if not allowed:
            raise ValidationError("every state is forbidden")
    inputs = {}
    raw = c.get("allowed_inputs", {})
    if not isinstance(raw, dict):
        raise NetworkFormatError("constraints.allowed_inputs must be an object")
    for key, us in raw.items():
        try:
            x = int(key)
        except ValueError:
            raise NetworkFormatError(
                f"constraints.allowed_inputs: key {key!r} is not a state index") from None
        inputs[x] = frozenset(_int_list(us, f"constraints.allowed_inputs.{key}"))
    return ConstraintSpec(allowed, inputs)


def network_to_dict(net: BooleanNetwork) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "states": list(net.state_names),
        "inputs": list(net.input_names),
        "functions": net.function_text(),
    }
    if isinstance(net.cost, LinearCost):
        doc["cost"] = {"linear": {"A": list(net.cost.A), "B": list(net.cost.B)}}
    elif isinstance(net.cost, TableCost):
        doc["cost"] = {"table": list(net.cost.values)}
    cons = net.constraints
    if not cons.is_trivial:
        out: dict[str, Any] = {}
        if cons.allowed_states is not None:
            out["allowed_states"] = sorted(cons.allowed_states)
        if cons.allowed_inputs:
            out["allowed_inputs"] = {str(x): sorted(us)
                                     for x, us in sorted(cons.allowed_inputs.items())}
        doc["constraints"] = out
    return doc


def load_network(path: str | os.PathLike) -> BooleanNetwork:
    """Read and validate a network file.

    Raises
    ------
    NetworkFormatError
        Invalid JSON (with line and column) or a missing/mistyped field.
    ValidationError
        A well-formed file that violates a network invariant.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return network_from_dict(doc)


def save_network(net: BooleanNetwork, path: str | os.PathLike) -> None:
    atomic_write_text(path, json.dumps(network_to_dict(net), indent=2) + "\n")


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path``, then rename it."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def fmt_float(v: float) -> float:
    """Round to 9 significant digits so that output is byte-stable."""
    return float(f"{v:.9g}")


def solution_to_dict(lam: float, algorithm: str, values: ValueTable, policy: Policy,
                     K: LogicalMatrix, *, iterations: int | None = None,
                     x0: int | None = None) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "lambda": lam,
        "algorithm": algorithm,
        "values": {str(x): fmt_float(v) for x, v in values.as_dict().items()},
        "policy": {str(x): u for x, u in policy.as_dict().items()},
        "K_columns": K.indices.tolist(),
    }
    if iterations is not None:
        doc["iterations"] = iterations
    if x0 is not None:
        doc["x0"] = x0
        doc["optimal_cost_at_x0"] = fmt_float(values[x0])
    return doc


def write_json(path: str | os.PathLike, doc: dict[str, Any]) -> None:
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def load_feedback(path: str | os.PathLike, M: int, N: int) -> LogicalMatrix:
    """Read ``K_columns`` from a solver output file as a logical matrix."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        cols = _int_list(doc["K_columns"], "K_columns")
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise NetworkFormatError(f"{path}: not a solver output file ({exc})") from exc
    if len(cols) != N:
        raise ValidationError(f"{path}: K has {len(cols)} columns, network has {N} states")
    try:
        return LogicalMatrix(M, np.asarray(cols))
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
