"""Command-line front end.

Subcommands::

    bcnopt solve    --network NET --algorithm {madani,vi} --lambda L [--theta T] [--x0 X]
    bcnopt simulate --network NET --policy SOL --x0 X (--horizon T | --epsilon E)
    bcnopt assr     --network NET
    bcnopt stg      --network NET
    bcnopt bench

Exit status: 0 on success, 1 on I/O or validation errors, 2 when the
constrained problem is infeasible.  Output files are written atomically, so
a failed command leaves ``--output`` untouched.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from importlib import resources

import numpy as np

from .errors import BCNError, InfeasibleProblemError
from .network import build_assr, cost_table, feasible_region
from .serialization import (atomic_write_text, fmt_float, load_feedback, load_network,
                            network_from_dict, solution_to_dict)
from .solvers import (extract_policy, feedback_matrix, madani, rollout, value_iteration)
from .stg import build_stg, to_dot
from .stp import encode_state

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(BCNError):
    pass


def parse_state(text: str, n: int) -> int:
    """1-based state index from ``text``.

    A string of exactly ``n`` binary digits (``n >= 2``) is a bit string,
    first variable first; anything else is read as a 1-based index.
    """
    text = text.strip()
    if n >= 2 and len(text) == n and set(text) <= {"0", "1"}:
        return encode_state([c == "1" for c in text]).index
    try:
        x = int(text)
    except ValueError:
        raise UsageError(f"cannot parse state {text!r}") from None
    if not 1 <= x <= 1 << n:
        raise UsageError(f"state index {x} outside [1, {1 << n}]")
    return x


def _threads():
    # solvers are single-threaded; the variable is validated for forward compatibility
    raw = os.environ.get("BCN_OPT_THREADS")
    if raw is not None and (not raw.isdigit() or int(raw) < 1):
        raise UsageError(f"BCN_OPT_THREADS must be a positive integer, got {raw!r}")


def _emit(text: str, output: str | None):
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(output, text)


def _prepare(net):
    if net.cost is None:
        raise UsageError("the network file has no stage cost")
    assr = build_assr(net)
    region = feasible_region(assr, net.constraints)
    if not region.is_feasible:
        raise InfeasibleProblemError("infeasible: no state can evolve indefinitely "
                                     "under the constraints")
    return assr, region, build_stg(assr, net.cost, region)


def _check_lambda(lam):
    if not 0.0 < lam < 1.0:
        raise UsageError(f"--lambda must lie in (0, 1), got {lam}")


def solve_network(net, algorithm, lam, theta=None, max_iterations=10**6):
    """Run one solver; returns ``(assr, region, values, policy, K, iterations)``."""
    _check_lambda(lam)
    assr, region, graph = _prepare(net)
    iterations = None
    if algorithm == "madani":
        values = madani(graph, lam)
    elif algorithm == "vi":
        if theta is None:
            raise UsageError("--theta is required with --algorithm vi")
        res = value_iteration(graph, lam, theta, max_iterations=max_iterations)
        if not res.converged:
            print(f"warning: value iteration stopped after {res.iterations} sweeps "
                  f"without reaching theta={theta}", file=sys.stderr)
        values, iterations = res.values, res.iterations
    else:
        raise UsageError(f"unknown algorithm {algorithm!r}")
    policy = extract_policy(graph, values, lam)
    K = feedback_matrix(policy, assr.M, assr.N)
    return assr, region, values, policy, K, iterations


def cmd_solve(args) -> int:
    net = load_network(args.network)
    x0 = parse_state(args.x0, net.n) if args.x0 is not None else None
    assr, region, values, policy, K, iters = solve_network(
        net, args.algorithm, args.lam, args.theta, args.max_iterations)
    if x0 is not None and not region.contains(x0):
        raise UsageError(f"x0 = {x0} lies outside the feasible region")
    if args.format == "json":
        doc = solution_to_dict(args.lam, args.algorithm, values, policy, K,
                               iterations=iters, x0=x0)
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["state_index", "value", "input_index"])
        for x, v in values.as_dict().items():
            w.writerow([x, f"{v:.9g}", policy[x]])
        text = buf.getvalue()
    if args.output:
        _emit(text, args.output)
    if iters is not None:
        print(f"iterations: {iters}")
    if x0 is not None:
        print(f"optimal cost at x0: {values[x0]:.9g}")
    if not args.output:
        _emit(text, None)
    return EXIT_OK


def simulate_csv(net, K, x0, lam, *, horizon=None, epsilon=None, region=None) -> str:
    assr = build_assr(net)
    if region is None:
        region = feasible_region(assr, net.constraints)
    res = rollout(assr, net.cost, K, x0, lam, horizon=horizon, epsilon=epsilon, region=region)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "state_index", "state_bits", "input_index", "stage_cost",
                "discounted_cumulative"])
    total, disc = 0.0, 1.0
    for t, (x, u, c) in enumerate(zip(res.states, res.inputs, res.stage_costs)):
        total += disc * c
        disc *= lam
        bits = format(x - 1, f"0{net.n}b")
        w.writerow([t, x, bits, u, f"{c:.9g}", f"{total:.9g}"])
    return buf.getvalue()


def cmd_simulate(args) -> int:
    net = load_network(args.network)
    if net.cost is None:
        raise UsageError("the network file has no stage cost")
    K = load_feedback(args.policy, net.M, net.N)
    lam = args.lam
    if lam is None:
        with open(args.policy, encoding="utf-8") as fh:
            lam = json.load(fh).get("lambda")
        if lam is None:
            raise UsageError("--lambda not given and not found in the policy file")
    _check_lambda(lam)
    x0 = parse_state(args.x0, net.n)
    assr = build_assr(net)
    region = feasible_region(assr, net.constraints)
    if not region.contains(x0):
        raise UsageError(f"x0 = {x0} lies outside the feasible region")
    if (args.horizon is None) == (args.epsilon is None):
        raise UsageError("give exactly one of --horizon and --epsilon")
    _emit(simulate_csv(net, K, x0, lam, horizon=args.horizon, epsilon=args.epsilon,
                       region=region), args.output)
    return EXIT_OK


def cmd_assr(args) -> int:
    net = load_network(args.network)
    _emit(",".join(map(str, build_assr(net).next.tolist())) + "\n", args.output)
    return EXIT_OK


def cmd_stg(args) -> int:
    net = load_network(args.network)
    _, _, graph = _prepare(net)
    _emit(to_dot(graph), args.output)
    return EXIT_OK


def load_benchmark():
    """Bundled ara operon network and its stored expectations."""
    data = resources.files("bcnopt") / "data"
    net = network_from_dict(json.loads((data / "ara.json").read_text(encoding="utf-8")))
    expected = json.loads((data / "ara_expected.json").read_text(encoding="utf-8"))
    return net, expected


def cmd_bench(args) -> int:
    net, exp = load_benchmark()
    lam, x0 = exp["lambda"], exp["x0"]
    report = {"network": "ara", "lambda": lam, "x0": x0, "runs": []}
    ok = True

    t = time.perf_counter()
    _, _, v_m, *_ = solve_network(net, "madani", lam)
    dt = time.perf_counter() - t
    j_m = v_m[x0]
    report["runs"].append({"algorithm": "madani", "seconds": round(dt, 4),
                           "value_at_x0": fmt_float(j_m)})
    print(f"madani       {dt:8.3f} s   v*(x0) = {j_m:.9g}")
    if abs(j_m - exp["optimal_cost_at_x0"]) > exp["tolerance"]:
        print(f"  MISMATCH: expected {exp['optimal_cost_at_x0']}", file=sys.stderr)
        ok = False
    if "reference_optimal_cost" in exp:
        pub = exp["reference_optimal_cost"]
        report["reference_optimal_cost"] = pub
        print(f"  reference optimum {pub}, difference {j_m - pub:+.6g}")

    for theta, want in exp["vi_iterations"].items():
        t = time.perf_counter()
        _, _, v_vi, _, _, iters = solve_network(net, "vi", lam, float(theta))
        dt = time.perf_counter() - t
        report["runs"].append({"algorithm": "vi", "theta": float(theta), "seconds": round(dt, 4),
                               "iterations": iters, "value_at_x0": fmt_float(v_vi[x0])})
        print(f"vi theta={theta:<6} {dt:6.3f} s   V(x0) = {v_vi[x0]:.9g}   sweeps = {iters}")
        if iters != want:
            print(f"  MISMATCH: expected {want} sweeps", file=sys.stderr)
            ok = False
        pub = exp.get("reference_vi_iterations", {}).get(theta)
        if pub is not None:
            report["runs"][-1]["reference_iterations"] = pub

    _, _, v_tight, *_ = solve_network(net, "vi", lam, 1e-12)
    gap = float(np.max(np.abs(v_tight.values - v_m.values)))
    report["vi_madani_max_gap"] = gap
    print(f"max |V_vi(theta=1e-12) - v*| = {gap:.3g}")
    if gap > 1e-6:
        ok = False
    report["ok"] = ok
    if args.output:
        _emit(json.dumps(report, indent=2) + "\n", args.output)
    return EXIT_OK if ok else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bcnopt",
                                description="Discounted optimal control of Boolean control networks")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute optimal values, policy and feedback matrix")
    s.add_argument("--network", required=True)
    s.add_argument("--algorithm", choices=["madani", "vi"], default="madani")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--theta", type=float)
    s.add_argument("--max-iterations", type=int, default=10**6)
    s.add_argument("--x0", help="1-based state index or bit string, e.g. 000001001")
    s.add_argument("--output", "-o")
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("simulate", help="roll out a feedback law and write a trajectory CSV")
    s.add_argument("--network", required=True)
    s.add_argument("--policy", required=True, help="output file of 'solve'")
    s.add_argument("--x0", required=True)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--horizon", type=int)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("assr", help="print the column indices of L")
    s.add_argument("--network", required=True)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_assr)

    s = sub.add_parser("stg", help="print the state transition graph in DOT format")
    s.add_argument("--network", required=True)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_stg)

    s = sub.add_parser("bench", help="run both solvers on the bundled ara operon network")
    s.add_argument("--output", "-o", help="also write a JSON report")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _threads()
        return args.func(args)
    except InfeasibleProblemError as exc:
        msg = str(exc)
        print(msg if msg.startswith("infeasible") else f"infeasible: {msg}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BCNError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
