"""Test-side oracles and generators, independent of the package internals.

The evaluators here are deliberately separate implementations of the
documented semantics (direct DAG evaluation over the netlist JSON, explicit
state enumeration over transition systems, truth-table SAT) so they can
cross-check the production paths.
"""

from __future__ import annotations

import json

from faultline import expr as ex
from faultline.circuit import parse_netlist
from faultline.random_engine import Rng


def mask(w: int) -> int:
    return (1 << w) - 1


# -- direct DAG evaluation over the netlist JSON document ------------------------


def dag_eval(doc: dict, inputs: dict[str, int]) -> dict[str, int]:
    """Evaluate a combinational netlist document directly: output port values
    for the given input port values. Independent of the simulator."""
    driver = {}
    for net in doc["nets"]:
        for sink in net["to"]:
            driver[sink] = net["from"]
    insts = {i["name"]: i for i in doc["instances"]}
    memo: dict[str, int] = {}

    def value(endpoint: str) -> int:
        if endpoint in memo:
            return memo[endpoint]
        parts = endpoint.split(".")
        if len(parts) == 1:
            if parts[0] in inputs:
                result = inputs[parts[0]]
            else:
                result = value(driver[endpoint])  # output port
        else:
            inst = insts[parts[0]]
            kind, params = inst["kind"], inst.get("params", {})
            w = params.get("width")

            def pin(name):
                return value(driver[f"{parts[0]}.{name}"])

            if kind == "const":
                result = params["value"]
            elif kind == "add":
                result = (pin("in0") + pin("in1")) & mask(w)
            elif kind == "sub":
                result = (pin("in0") - pin("in1")) & mask(w)
            elif kind == "mul":
                result = (pin("in0") * pin("in1")) & mask(w)
            elif kind == "and":
                result = pin("in0") & pin("in1")
            elif kind == "or":
                result = pin("in0") | pin("in1")
            elif kind == "xor":
                result = pin("in0") ^ pin("in1")
            elif kind == "shl":
                s = pin("in1")
                result = (pin("in0") << s) & mask(w) if s < w else 0
            elif kind == "lshr":
                s = pin("in1")
                result = pin("in0") >> s if s < w else 0
            elif kind == "eq":
                result = int(pin("in0") == pin("in1"))
            elif kind == "ult":
                result = int(pin("in0") < pin("in1"))
            elif kind == "ule":
                result = int(pin("in0") <= pin("in1"))
            elif kind == "not":
                result = (~pin("in")) & mask(w)
            elif kind == "neg":
                result = (-pin("in")) & mask(w)
            elif kind == "mux":
                result = pin("in1") if pin("sel") else pin("in0")
            elif kind == "concat":
                result = pin("in0") | (pin("in1") << params["width0"])
            elif kind == "slice":
                result = (pin("in") >> params["lo"]) & mask(params["hi"] - params["lo"])
            else:
                raise AssertionError(kind)
        memo[endpoint] = result
        return result

    return {
        p["name"]: value(p["name"]) for p in doc["ports"] if p["dir"] == "output"
    }


# -- random combinational netlist generator -----------------------------------------


def random_comb_doc(rng: Rng, max_total_in: int = 12, max_nodes: int = 10) -> dict:
    """A random, valid, purely combinational netlist document."""
    n_inputs = 1 + rng.bits(2) % 3  # 1..3
    widths = []
    budget = max_total_in
    for i in range(n_inputs):
        hi = min(6, budget - (n_inputs - i - 1))
        w = 1 + rng.bits(3) % hi
        widths.append(w)
        budget -= w
    ports = [
        {"name": f"i{k}", "dir": "input", "type": {"bv": w} if w > 1 else "bit"}
        for k, w in enumerate(widths)
    ]
    pool: list[tuple[str, int]] = [(f"i{k}", w) for k, w in enumerate(widths)]
    instances = []
    nets: dict[str, list[str]] = {}

    def connect(src: str, sink: str) -> None:
        nets.setdefault(src, []).append(sink)

    def pick(width=None):
        cands = [s for s in pool if width is None or s[1] == width]
        return cands[rng.bits(16) % len(cands)] if cands else None

    n_nodes = 3 + rng.bits(8) % max_nodes
    for k in range(n_nodes):
        name = f"n{k}"
        choice = rng.bits(8) % 10
        if choice == 0 or not pool:
            w = 1 + rng.bits(2) % 4
            v = rng.bits(w)
            instances.append({"name": name, "kind": "const", "params": {"width": w, "value": v}})
            pool.append((f"{name}.out", w))
            continue
        src, w = pick()
        if choice in (1, 2, 3):  # binop at width w
            kind = ("add", "sub", "mul", "and", "or", "xor", "shl", "lshr")[rng.bits(8) % 8]
            other, _ = pick(w)
            instances.append({"name": name, "kind": kind, "params": {"width": w}})
            connect(src, f"{name}.in0")
            connect(other, f"{name}.in1")
            pool.append((f"{name}.out", w))
        elif choice == 4:  # comparison -> width 1
            kind = ("eq", "ult", "ule")[rng.bits(8) % 3]
            other, _ = pick(w)
            instances.append({"name": name, "kind": kind, "params": {"width": w}})
            connect(src, f"{name}.in0")
            connect(other, f"{name}.in1")
            pool.append((f"{name}.out", 1))
        elif choice == 5:
            kind = ("not", "neg")[rng.bits(1)]
            instances.append({"name": name, "kind": kind, "params": {"width": w}})
            connect(src, f"{name}.in")
            pool.append((f"{name}.out", w))
        elif choice == 6:
            sel = pick(1)
            if sel is None:
                continue
            other, _ = pick(w)
            instances.append({"name": name, "kind": "mux", "params": {"width": w}})
            connect(src, f"{name}.in0")
            connect(other, f"{name}.in1")
            connect(sel[0], f"{name}.sel")
            pool.append((f"{name}.out", w))
        elif choice == 7:
            other, w1 = pick()
            instances.append(
                {"name": name, "kind": "concat", "params": {"width0": w, "width1": w1}}
            )
            connect(src, f"{name}.in0")
            connect(other, f"{name}.in1")
            pool.append((f"{name}.out", w + w1))
        elif choice == 8 and w >= 2:
            lo = rng.bits(8) % (w - 1)
            hi = lo + 1 + rng.bits(8) % (w - lo)
            instances.append(
                {"name": name, "kind": "slice", "params": {"width": w, "lo": lo, "hi": hi}}
            )
            connect(src, f"{name}.in")
            pool.append((f"{name}.out", hi - lo))
        else:  # xor with self keeps the pool growing deterministically
            instances.append({"name": name, "kind": "xor", "params": {"width": w}})
            connect(src, f"{name}.in0")
            connect(src, f"{name}.in1")
            pool.append((f"{name}.out", w))

    n_out = 1 + rng.bits(1)
    for k in range(n_out):
        src, w = pool[rng.bits(16) % len(pool)]
        ports.append({"name": f"o{k}", "dir": "output", "type": {"bv": w} if w > 1 else "bit"})
        connect(src, f"o{k}")

    return {
        "name": f"Rand{rng.bits(16)}",
        "ports": ports,
        "instances": instances,
        "nets": [{"from": s, "to": sinks} for s, sinks in nets.items()],
    }


def circuit_from_doc(doc: dict):
    return parse_netlist(json.dumps(doc))


# -- truth-table SAT oracle -----------------------------------------------------------


def brute_force_sat(clauses: list[list[int]], nvars: int) -> int | None:
    """Exhaustive SAT via bitmask truth tables; returns a satisfying
    assignment as an integer (bit v-1 = value of variable v) or None."""
    total = 1 << nvars
    full = (1 << total) - 1
    var_mask = {}
    for v in range(nvars):
        s = 1 << v
        unit = ((1 << s) - 1) << s  # 2s bits: low half 0, high half 1
        rep = full // ((1 << (2 * s)) - 1)
        var_mask[v + 1] = unit * rep
    formula = full
    for clause in clauses:
        cm = 0
        for lit in clause:
            m = var_mask[abs(lit)]
            cm |= m if lit > 0 else (full ^ m)
        formula &= cm
        if not formula:
            return None
    return (formula & -formula).bit_length() - 1


def clause_satisfied(clauses: list[list[int]], model: list[bool]) -> bool:
    return all(any(model[l] if l > 0 else not model[-l] for l in clause) for clause in clauses)


# -- explicit-state enumeration oracle for transition systems --------------------------


def enumerate_cex_depth(ts, bound: int) -> int | None:
    """Shallowest property-violation depth by explicit enumeration, or None.

    Walks every reachable state, trying every symbolic-input combination that
    satisfies the invariants, checking every property; mirrors the BMC
    semantics over concrete values.
    """
    input_names = list(ts.inputs)
    props = [ts.closed_property(i) for i in range(len(ts.properties))]
    states = {tuple(ts.init[name] for name in ts.state)}
    for depth in range(bound + 1):
        next_states = set()
        for state in sorted(states):
            base = dict(zip(ts.state, state))
            for combo in _combos(input_names, ts.inputs):
                env = dict(base)
                env.update(combo)
                if not all(ex.eval_pure(inv, env) for inv in ts.invariants):
                    continue
                for prop in props:
                    if not ex.eval_pure(prop, env):
                        return depth
                next_states.add(
                    tuple(ex.eval_pure(ts.next[name], env) for name in ts.state)
                )
        states = next_states if ts.state else states
    return None


def _combos(names, widths):
    if not names:
        yield {}
        return
    head, rest = names[0], names[1:]
    for v in range(1 << widths[head]):
        for tail in _combos(rest, widths):
            out = {head: v}
            out.update(tail)
            yield out
