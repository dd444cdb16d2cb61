"""In-process RTL interpreter: executes action programs against a netlist.

The netlist is compiled once into a levelized model (combinational nodes in
dependency order, registers split out); each run then owns a mutable value
store. Semantics:

* Poke buffers a pending input value; nothing propagates until an Eval.
* Eval applies pending pokes and propagates combinational logic.
* Step inverts the clock one unit at a time. Pending pokes propagate at the
  moment of each edge (an implicit Eval); on a rising edge registers latch
  their D values as sampled just before the edge, then logic propagates again.
* Async-reset-n ports act at propagation time regardless of the clock:
  while such a port reads 0, its registers are held at their reset value.
* The clock starts low, so the first step unit is a rising edge.

All signals start at 0; register internal state starts at the declared reset
value but is only visible on its Q net after the first propagation.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import actions as ac
from . import expr as ex
from .circuit import CircuitDecl, HierRef, PortKind, interface_digest, resolve
from .errors import FaultlineError, ProgramValidationError
from .report import Failure, TestReport

MASK = ex.MASK


@dataclass(frozen=True)
class _Node:
    name: str
    kind: str
    params: tuple[tuple[str, object], ...]
    in_slots: tuple[int, ...]
    width: int
    out_slot: int


@dataclass(frozen=True)
class _Reg:
    name: str
    width: int
    d_slot: int
    q_slot: int
    arst_slot: int | None
    reset_value: int


@dataclass(frozen=True)
class SimModel:
    """Levelized, immutable execution model for one circuit."""

    circuit: CircuitDecl
    digest: str
    n_slots: int
    slot_of: dict  # endpoint path tuple -> value slot (every readable endpoint)
    slot_names: tuple[str, ...]  # dotted source name per slot, for traces
    nodes: tuple[_Node, ...]
    registers: tuple[_Reg, ...]
    clock_slot: int | None


class CombinationalCycleError(FaultlineError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("combinational cycle through: " + " -> ".join(cycle))


def compile_sim(c: CircuitDecl) -> SimModel:
    """Levelize a circuit. Raises CombinationalCycleError naming the cycle."""
    slot_of: dict[tuple[str, ...], int] = {}
    slot_names: list[str] = []

    def new_slot(endpoint: tuple[str, ...]) -> int:
        slot_of[endpoint] = len(slot_names)
        slot_names.append(".".join(endpoint))
        return slot_of[endpoint]

    from .circuit import primitive_pins

    for p in c.ports:
        if p.direction == "input":
            new_slot((p.name,))
    out_pin_owner: dict[int, str] = {}  # out slot -> instance name (non-register)
    for inst in c.instances:
        for pin, (w, is_out) in primitive_pins(inst.kind, dict(inst.params)).items():
            if is_out:
                s = new_slot((inst.name, pin))
                if inst.kind != "register":
                    out_pin_owner[s] = inst.name

    # Sinks read through their driver.
    for inst in c.instances:
        for pin, (w, is_out) in primitive_pins(inst.kind, dict(inst.params)).items():
            if not is_out:
                slot_of[(inst.name, pin)] = slot_of[c.driver_of((inst.name, pin))]
    for p in c.ports:
        if p.direction == "output":
            slot_of[(p.name,)] = slot_of[c.driver_of((p.name,))]

    # Build combinational nodes and levelize with Kahn's algorithm.
    nodes: dict[str, _Node] = {}
    for inst in c.instances:
        if inst.kind == "register":
            continue
        params = dict(inst.params)
        pins = primitive_pins(inst.kind, params)
        ins = tuple(slot_of[(inst.name, pin)] for pin, (w, o) in pins.items() if not o)
        (out_pin,) = [pin for pin, (w, o) in pins.items() if o]
        width = pins[out_pin][0]
        nodes[inst.name] = _Node(
            inst.name, inst.kind, inst.params, ins, width, slot_of[(inst.name, out_pin)]
        )

    deps: dict[str, set[str]] = {n: set() for n in nodes}
    users: dict[str, set[str]] = {n: set() for n in nodes}
    for node in nodes.values():
        for s in node.in_slots:
            owner = out_pin_owner.get(s)
            if owner is not None and owner != node.name:
                deps[node.name].add(owner)
                users[owner].add(node.name)
            elif owner == node.name:
                deps[node.name].add(owner)  # direct self-loop

    indeg = {n: len(deps[n]) for n in nodes}
    ready = sorted(n for n in nodes if indeg[n] == 0)
    order: list[_Node] = []
    qi = 0
    while qi < len(ready):
        name = ready[qi]
        qi += 1
        order.append(nodes[name])
        for u in sorted(users[name]):
            indeg[u] -= 1
            if indeg[u] == 0:
                ready.append(u)
    if len(order) != len(nodes):
        leftover = {n for n in nodes if indeg[n] > 0}
        cycle = _find_cycle(leftover, deps)
        raise CombinationalCycleError(cycle)

    registers = []
    for inst in c.registers:
        params = dict(inst.params)
        arst = slot_of[(inst.name, "arst_n")] if params.get("has_async_reset_n") else None
        registers.append(
            _Reg(
                inst.name,
                params["width"],
                slot_of[(inst.name, "D")],
                slot_of[(inst.name, "Q")],
                arst,
                params.get("reset_value", 0),
            )
        )

    clock = next((p for p in c.ports if p.ptype.kind is PortKind.CLOCK), None)
    return SimModel(
        circuit=c,
        digest=interface_digest(c),
        n_slots=len(slot_names),
        slot_of=slot_of,
        slot_names=tuple(slot_names),
        nodes=tuple(order),
        registers=tuple(registers),
        clock_slot=slot_of[(clock.name,)] if clock else None,
    )


def _find_cycle(leftover: set[str], deps: dict[str, set[str]]) -> list[str]:
    start = sorted(leftover)[0]
    seen: list[str] = []
    node = start
    while node not in seen:
        seen.append(node)
        node = sorted(d for d in deps[node] if d in leftover)[0]
    return seen[seen.index(node):]


def _node_value(node: _Node, values: list[int]) -> int:
    k = node.kind
    params = dict(node.params)
    w = node.width
    vin = [values[s] for s in node.in_slots]
    if k == "const":
        return params["value"]
    if k == "add":
        return (vin[0] + vin[1]) & MASK(w)
    if k == "sub":
        return (vin[0] - vin[1]) & MASK(w)
    if k == "mul":
        return (vin[0] * vin[1]) & MASK(w)
    if k == "and":
        return vin[0] & vin[1]
    if k == "or":
        return vin[0] | vin[1]
    if k == "xor":
        return vin[0] ^ vin[1]
    if k == "shl":
        return (vin[0] << vin[1]) & MASK(w) if vin[1] < w else 0
    if k == "lshr":
        return vin[0] >> vin[1] if vin[1] < w else 0
    if k == "eq":
        return int(vin[0] == vin[1])
    if k == "ult":
        return int(vin[0] < vin[1])
    if k == "ule":
        return int(vin[0] <= vin[1])
    if k == "not":
        return (~vin[0]) & MASK(w)
    if k == "neg":
        return (-vin[0]) & MASK(w)
    if k == "mux":
        # pins are ordered in0, in1, sel
        return vin[1] if vin[2] else vin[0]
    if k == "concat":
        return vin[0] | (vin[1] << params["width0"])
    if k == "slice":
        return (vin[0] >> params["lo"]) & MASK(params["hi"] - params["lo"])
    raise AssertionError(k)


class Simulation:
    """Mutable run state over an immutable SimModel."""

    def __init__(self, model: SimModel):
        self.model = model
        self.values = [0] * model.n_slots
        self.reg_values = {r.name: r.reset_value for r in model.registers}
        self.pending: dict[int, int] = {}
        self.time = 0  # half-steps
        self.trace: list[dict] | None = None

    # -- primitive operations ----------------------------------------------

    def slot(self, ref) -> int:
        ref = HierRef.of(ref)
        try:
            return self.model.slot_of[ref.path]
        except KeyError:
            # resolve() produces the canonical error message
            resolve(self.model.circuit, ref)
            raise

    def peek(self, ref) -> int:
        return self.values[self.slot(ref)]

    def poke(self, ref, value: int) -> None:
        self.pending[self.slot(ref)] = value

    def propagate(self) -> None:
        values = self.values
        for r in self.model.registers:
            if r.arst_slot is not None and values[r.arst_slot] == 0:
                self.reg_values[r.name] = r.reset_value
            values[r.q_slot] = self.reg_values[r.name]
        for node in self.model.nodes:
            values[node.out_slot] = _node_value(node, values)

    def _apply_pokes(self) -> None:
        for slot, v in self.pending.items():
            self.values[slot] = v
        self.pending.clear()

    def do_eval(self) -> None:
        before = list(self.values) if self.trace is not None else None
        self._apply_pokes()
        self.propagate()
        self._record_changes(before)

    def do_step(self, n: int = 1) -> None:
        if self.model.clock_slot is None:
            raise FaultlineError("cannot step a circuit without a clock port")
        for _ in range(n):
            before = list(self.values) if self.trace is not None else None
            self._apply_pokes()
            self.propagate()
            clk = self.values[self.model.clock_slot] ^ 1
            self.values[self.model.clock_slot] = clk
            self.time += 1
            if clk == 1:  # rising edge: latch D as sampled just before the edge
                nexts = {r.name: self.values[r.d_slot] for r in self.model.registers}
                for r in self.model.registers:
                    if r.arst_slot is not None and self.values[r.arst_slot] == 0:
                        self.reg_values[r.name] = r.reset_value
                    else:
                        self.reg_values[r.name] = nexts[r.name]
                self.propagate()
            self._record_changes(before)

    def _record_changes(self, before) -> None:
        if self.trace is None or before is None:
            return
        for i, (old, new) in enumerate(zip(before, self.values)):
            if old != new:
                self.trace.append({"time": self.time, "signal": self.model.slot_names[i], "value": new})

    def eval_expr(self, e: ex.Expr, bindings: dict[str, int] | None = None) -> int:
        return ex.eval_pure(e, bindings or {}, peek_fn=self.peek)


def eval_expr(sim: Simulation, e: ex.Expr, bindings: dict[str, int] | None = None) -> int:
    """Evaluate an expression against the current simulation state."""
    return sim.eval_expr(e, bindings)


def format_print(fmt: str, args: list[tuple[int, int]]) -> str:
    """Render a print action; args are (value, width) pairs.

    %d is unpadded decimal; %x and %b are zero-padded to the value's width.
    """
    out = []
    i = 0
    ai = 0
    while i < len(fmt):
        ch = fmt[i]
        if ch == "%":
            c = fmt[i + 1]
            if c == "%":
                out.append("%")
            else:
                v, w = args[ai]
                ai += 1
                if c == "d":
                    out.append(str(v))
                elif c == "x":
                    out.append(format(v, f"0{(w + 3) // 4}x"))
                else:
                    out.append(format(v, f"0{w}b"))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Abort(Exception):
    pass


def run(
    p: ac.ActionProgram,
    m: SimModel,
    *,
    fail_fast: bool = False,
    max_loop_iters: int = 1_000_000,
    trace: bool = False,
) -> TestReport:
    """Execute a program and collect a report.

    Expect mismatches are collected by default and the run continues;
    fail_fast stops at the first failure. A While construct that exceeds
    max_loop_iters iterations aborts the run with an error verdict.
    """
    diags = ac.validate_program(p, m.circuit)
    if diags:
        raise ProgramValidationError(diags)

    sim = Simulation(m)
    report = TestReport()
    if trace:
        sim.trace = report.trace = []
    prints: list[str] = []
    counts: dict[str, int] = {}

    def bump(kind: str):
        counts[kind] = counts.get(kind, 0) + 1

    def exec_actions(actions, prefix: str, bindings: dict[str, int]):
        for i, a in enumerate(actions):
            path = f"{prefix}[{i}]"
            bump(type(a).__name__.lower())
            if isinstance(a, ac.Poke):
                sim.poke(a.ref, sim.eval_expr(a.value, bindings))
            elif isinstance(a, ac.Eval):
                sim.do_eval()
            elif isinstance(a, ac.Step):
                sim.do_step(a.n)
            elif isinstance(a, ac.Expect):
                observed = sim.peek(a.ref)
                expected = sim.eval_expr(a.value, bindings)
                if observed != expected:
                    report.failures.append(
                        Failure(
                            path,
                            "expect-mismatch",
                            f"{a.ref} is {observed}, expected {expected}",
                            observed=observed,
                            expected=expected,
                            time=sim.time,
                        )
                    )
                    if fail_fast:
                        raise _Abort()
            elif isinstance(a, ac.Print):
                vals = [(sim.eval_expr(arg, bindings), arg.width) for arg in a.args]
                prints.append(format_print(a.format, vals))
            elif isinstance(a, ac.While):
                iters = 0
                while sim.eval_expr(a.cond, bindings):
                    if iters >= max_loop_iters:
                        report.errors.append(
                            f"{path}: while loop exceeded max_loop_iters={max_loop_iters}"
                        )
                        raise _Abort()
                    iters += 1
                    exec_actions(a.body, f"{path}.body", bindings)
            elif isinstance(a, ac.If):
                if sim.eval_expr(a.cond, bindings):
                    exec_actions(a.then, f"{path}.then", bindings)
                else:
                    exec_actions(a.orelse, f"{path}.else", bindings)
            elif isinstance(a, ac.For):
                inner = dict(bindings)
                for idx in range(a.count):
                    inner[a.var] = idx
                    exec_actions(a.body, f"{path}.body", inner)
            elif isinstance(a, ac.Assume):
                (var,) = ex.free_vars(a.predicate)
                held = ex.eval_pure(a.predicate, {var: sim.peek(a.ref)})
                if not held:
                    report.failures.append(
                        Failure(
                            path,
                            "assume-violated",
                            f"current value of {a.ref} violates the recorded assumption",
                            observed=sim.peek(a.ref),
                            time=sim.time,
                        )
                    )
                    if fail_fast:
                        raise _Abort()
            elif isinstance(a, ac.Guarantee):
                bind = {name: sim.peek(HierRef.of(name)) for name in ex.free_vars(a.predicate)}
                if not ex.eval_pure(a.predicate, bind):
                    report.failures.append(
                        Failure(
                            path,
                            "guarantee-violated",
                            "guarantee predicate is false in the current state",
                            bindings=bind,
                            time=sim.time,
                        )
                    )
                    if fail_fast:
                        raise _Abort()
            else:
                raise AssertionError(type(a).__name__)

    try:
        exec_actions(p.actions, "root", {})
    except _Abort:
        pass
    report.prints = "".join(prints)
    report.action_counts = counts
    return report
