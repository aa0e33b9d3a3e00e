import json

import numpy as np
import pytest

from bcnopt.errors import NetworkFormatError, ValidationError
from bcnopt.network import BooleanNetwork, ConstraintSpec, LinearCost, TableCost
from bcnopt.serialization import (fmt_float, load_feedback, load_network, network_from_dict,
                                  network_to_dict, save_network, write_json)

from conftest import ARA_A, ARA_B, ARA_FUNCS, ARA_INPUTS, ARA_STATES

TOY = {
    "states": ["x1", "x2"],
    "inputs": ["u"],
    "functions": {"x1": "x2 & u", "x2": "!x1"},
    "cost": {"linear": {"A": [1, 0], "B": [2]}},
}


def test_round_trip(tmp_path):
    nets = [
        network_from_dict(TOY),
        BooleanNetwork(("a", "b"), (), ("a ^ b", "1"), TableCost((1.5, -2, 0, 3)),
                       ConstraintSpec(frozenset({1, 2, 4}), {4: frozenset({1})})),
        BooleanNetwork(("a",), ("u", "v"), ("(a | u) & !v",)),
    ]
    for i, net in enumerate(nets):
        path = tmp_path / f"n{i}.json"
        save_network(net, path)
        assert load_network(path) == net


def test_bundled_ara(ara):
    net = ara[0]
    assert net.state_names == ARA_STATES
    assert net.input_names == ARA_INPUTS
    assert net.cost == LinearCost(ARA_A, ARA_B)
    assert net.constraints.is_trivial
    again = network_from_dict({"states": list(ARA_STATES), "inputs": list(ARA_INPUTS),
                               "functions": ARA_FUNCS,
                               "cost": {"linear": {"A": list(ARA_A), "B": list(ARA_B)}}})
    assert again == net


def test_duplicate_state_name():
    doc = dict(TOY, states=["x1", "x1"])
    with pytest.raises((ValidationError, NetworkFormatError)):
        network_from_dict(doc)


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "states": ["x"],\n  "inputs": [,]\n}\n')
    with pytest.raises(NetworkFormatError, match="line 3, column"):
        load_network(path)


@pytest.mark.parametrize("mutate, exc, pattern", [
    (lambda d: d.pop("functions"), NetworkFormatError, "functions"),
    (lambda d: d["functions"].pop("x2"), NetworkFormatError, "x2"),
    (lambda d: d["functions"].update(x2="x1 &"), NetworkFormatError, "functions.x2"),
    (lambda d: d.update(cost={"quadratic": {}}), NetworkFormatError, "cost"),
    (lambda d: d.update(cost={"linear": {"A": [1], "B": [2]}}), ValidationError, None),
    (lambda d: d.update(constraints={"allowed_states": [1], "forbidden_states": [2]}),
     NetworkFormatError, "mutually exclusive"),
    (lambda d: d.update(constraints={"allowed_states": [9]}), ValidationError, None),
    (lambda d: d.update(constraints={"allowed_inputs": {"one": [1]}}), NetworkFormatError, "one"),
])
def test_invalid_documents(mutate, exc, pattern):
    doc = json.loads(json.dumps(TOY))
    mutate(doc)
    with pytest.raises(exc, match=pattern):
        network_from_dict(doc)


def test_forbidden_states():
    net = network_from_dict(dict(TOY, constraints={"forbidden_states": [2, 3]}))
    assert net.constraints.allowed_states == {1, 4}
    with pytest.raises(ValidationError):
        network_from_dict(dict(TOY, constraints={"forbidden_states": [1, 2, 3, 4]}))


def test_load_feedback(tmp_path):
    path = tmp_path / "sol.json"
    write_json(path, {"lambda": 0.5, "K_columns": [2, 1, 1, 1]})
    K = load_feedback(path, 2, 4)
    assert K.indices.tolist() == [2, 1, 1, 1]
    with pytest.raises(ValidationError):
        load_feedback(path, 2, 8)
    with pytest.raises(ValidationError):
        load_feedback(path, 1, 4)
    path.write_text("{}")
    with pytest.raises(NetworkFormatError):
        load_feedback(path, 2, 4)


def test_fmt_float():
    assert fmt_float(1 / 3) == 0.333333333
    assert fmt_float(-10.0) == -10.0
    assert np.isclose(fmt_float(5.2320000004), 5.232)
