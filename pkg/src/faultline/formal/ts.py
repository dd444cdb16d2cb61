"""Bitvector transition systems from circuits plus recorded action prefixes.

A circuit encodes as: one state variable per register, one input variable per
non-clock input port, functional next-state and output equations obtained by
evaluating the levelized netlist symbolically. One transition step corresponds
to one full clock cycle (step(2) in action terms); the clock itself is
implicit. Async-reset-n behaviour becomes a select on the reset input, both
in the visible register value and in the next-state function.

lower_prefix executes a program's concrete poke/eval/step prefix through the
interpreter, takes the resulting register values as the init constraint, and
freezes every input that no assumption mentions at its final concrete value.
Registers whose next-state function collapses to themselves under the frozen
inputs are propagated away as constants, so a fully configured combinational
property (the common case for configure-then-verify programs) yields a
state-free system that a k=1 induction settles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import actions as ac
from .. import expr as ex
from ..circuit import CircuitDecl, PortKind
from ..errors import FormalError
from ..sim import SimModel, Simulation, compile_sim

MASK = ex.MASK


# -- folding constructors -----------------------------------------------------


def _const(e: ex.Expr) -> int | None:
    return e.value if isinstance(e, ex.Const) else None


def mk_unop(op: str, child: ex.Expr) -> ex.Expr:
    width = 1 if op == "not" else child.width
    node = ex.Unop(op, child, width)
    if _const(child) is not None:
        return ex.Const(ex.eval_pure(node, {}), width)
    return node


def mk_binop(op: str, left: ex.Expr, right: ex.Expr) -> ex.Expr:
    width = 1 if op in ex.CMP_BINOPS + ex.LOGIC_BINOPS else left.width
    node = ex.Binop(op, left, right, width)
    lv, rv = _const(left), _const(right)
    if lv is not None and rv is not None:
        return ex.Const(ex.eval_pure(node, {}), width)
    ones = MASK(width)
    if op == "and":
        if lv == 0 or rv == 0:
            return ex.Const(0, width)
        if lv == ones:
            return right
        if rv == ones:
            return left
    elif op == "or":
        if lv == ones or rv == ones:
            return ex.Const(ones, width)
        if lv == 0:
            return right
        if rv == 0:
            return left
    elif op in ("add", "xor", "shl", "lshr"):
        if rv == 0:
            return left
        if op in ("add", "xor") and lv == 0:
            return right
    elif op == "sub" and rv == 0:
        return left
    return node


def mk_zext(child: ex.Expr, width: int) -> ex.Expr:
    if width == child.width:
        return child
    if _const(child) is not None:
        return ex.Const(child.value, width)
    return ex.Zext(child, width)


def mk_trunc(child: ex.Expr, width: int) -> ex.Expr:
    if width == child.width:
        return child
    if _const(child) is not None:
        return ex.Const(child.value & MASK(width), width)
    return ex.Trunc(child, width)


def mk_ite(sel: ex.Expr, then_e: ex.Expr, else_e: ex.Expr) -> ex.Expr:
    """Word-level select, built from mask arithmetic (sel is 1 bit)."""
    sv = _const(sel)
    if sv is not None:
        return then_e if sv else else_e
    w = then_e.width
    mask = mk_unop("neg", mk_zext(sel, w))  # all ones when sel=1
    return mk_binop(
        "or",
        mk_binop("and", then_e, mask),
        mk_binop("and", else_e, mk_unop("bitnot", mask)),
    )


def subst_vars(e: ex.Expr, mapping: dict[str, ex.Expr], _memo=None) -> ex.Expr:
    """Substitute variables by name, re-folding along the way."""
    if _memo is None:
        _memo = {}
    hit = _memo.get(id(e))
    if hit is not None:
        return hit[1]

    if isinstance(e, ex.Var):
        out = mapping.get(e.name, e)
    elif isinstance(e, (ex.Const, ex.Peek)):
        out = e
    elif isinstance(e, ex.Unop):
        out = mk_unop(e.op, subst_vars(e.child, mapping, _memo))
    elif isinstance(e, ex.Binop):
        out = mk_binop(e.op, subst_vars(e.left, mapping, _memo), subst_vars(e.right, mapping, _memo))
    elif isinstance(e, ex.Zext):
        out = mk_zext(subst_vars(e.child, mapping, _memo), e.width)
    else:
        assert isinstance(e, ex.Trunc)
        out = mk_trunc(subst_vars(e.child, mapping, _memo), e.width)
    _memo[id(e)] = (e, out)
    return out


def rename_step(e: ex.Expr, step: int, _memo=None) -> ex.Expr:
    """Give every variable a @step suffix (timed copy for unrolling)."""
    if _memo is None:
        _memo = {}
    hit = _memo.get(id(e))
    if hit is not None:
        return hit[1]
    if isinstance(e, ex.Var):
        out = ex.Var(f"{e.name}@{step}", e.width)
    elif isinstance(e, (ex.Const, ex.Peek)):
        out = e
    elif isinstance(e, ex.Unop):
        out = ex.Unop(e.op, rename_step(e.child, step, _memo), e.width)
    elif isinstance(e, ex.Binop):
        out = ex.Binop(e.op, rename_step(e.left, step, _memo), rename_step(e.right, step, _memo), e.width)
    elif isinstance(e, ex.Zext):
        out = ex.Zext(rename_step(e.child, step, _memo), e.width)
    else:
        assert isinstance(e, ex.Trunc)
        out = ex.Trunc(rename_step(e.child, step, _memo), e.width)
    _memo[id(e)] = (e, out)
    return out


# -- the transition system ------------------------------------------------------


@dataclass
class TransitionSystem:
    """State machine over bitvector variables with functional updates.

    ``properties`` and ``outputs`` are expressed over port names; check-time
    substitution of ``outputs`` (and ``frozen`` constants) closes them over
    input and state variables only.
    """

    circuit: CircuitDecl
    inputs: dict[str, int]  # symbolic input variable name -> width
    state: dict[str, int]  # state variable name -> width
    init: dict[str, int]  # state variable -> initial value
    next: dict[str, ex.Expr]  # state variable -> next-state expression
    outputs: dict[str, ex.Expr]  # output port -> expression over inputs+state
    invariants: list[ex.Expr] = field(default_factory=list)  # over input vars
    properties: list[ex.Expr] = field(default_factory=list)  # over port names
    frozen: dict[str, int] = field(default_factory=dict)  # concrete input pins
    prefix: tuple = ()  # concrete actions replayed before the symbolic phase

    def closed_property(self, index: int) -> ex.Expr:
        """Property with outputs and frozen inputs substituted away."""
        mapping: dict[str, ex.Expr] = {
            name: ex.Const(v, self.circuit.port(name).width) for name, v in self.frozen.items()
        }
        mapping.update(self.outputs)
        return subst_vars(self.properties[index], mapping)


def _symbolic_values(model: SimModel) -> list[ex.Expr]:
    """Evaluate the levelized netlist over expressions instead of integers."""
    c = model.circuit
    values: list[ex.Expr | None] = [None] * model.n_slots
    for p in c.ports:
        if p.direction != "input" or p.ptype.kind is PortKind.CLOCK:
            continue
        values[model.slot_of[(p.name,)]] = ex.Var(p.name, p.width)
    reset_var: dict[str, ex.Expr] = {}
    for r in model.registers:
        visible: ex.Expr = ex.Var(r.name, r.width)
        if r.arst_slot is not None:
            rst = values[r.arst_slot]
            reset_var[r.name] = rst
            visible = mk_ite(mk_binop("eq", rst, ex.Const(0, 1)), ex.Const(r.reset_value, r.width), visible)
        values[r.q_slot] = visible

    for node in model.nodes:
        params = dict(node.params)
        vin = [values[s] for s in node.in_slots]
        k = node.kind
        if k == "const":
            out = ex.Const(params["value"], node.width)
        elif k in ("add", "sub", "mul", "and", "or", "xor", "shl", "lshr", "eq", "ult", "ule"):
            out = mk_binop(k, vin[0], vin[1])
        elif k == "not":
            out = mk_unop("bitnot", vin[0])
        elif k == "neg":
            out = mk_unop("neg", vin[0])
        elif k == "mux":
            out = mk_ite(vin[2], vin[1], vin[0])
        elif k == "concat":
            w = node.width
            low = mk_zext(vin[0], w)
            high = mk_binop("shl", mk_zext(vin[1], w), ex.Const(params["width0"], w))
            out = mk_binop("or", low, high)
        else:
            assert k == "slice"
            lo, hi = params["lo"], params["hi"]
            shifted = mk_binop("lshr", vin[0], ex.Const(lo, vin[0].width)) if lo else vin[0]
            out = mk_trunc(shifted, hi - lo)
        values[node.out_slot] = out
    return values, reset_var


def encode_ts(c: CircuitDecl) -> TransitionSystem:
    """Encode a circuit: registers become state, logic becomes equations."""
    model = compile_sim(c)  # raises on combinational cycles
    values, reset_var = _symbolic_values(model)

    inputs = {
        p.name: p.width
        for p in c.ports
        if p.direction == "input" and p.ptype.kind is not PortKind.CLOCK
    }
    state = {r.name: r.width for r in model.registers}
    init = {r.name: r.reset_value for r in model.registers}
    nexts: dict[str, ex.Expr] = {}
    for r in model.registers:
        d = values[r.d_slot]
        if r.name in reset_var:
            d = mk_ite(
                mk_binop("eq", reset_var[r.name], ex.Const(0, 1)),
                ex.Const(r.reset_value, r.width),
                d,
            )
        nexts[r.name] = d
    outputs = {
        p.name: values[model.slot_of[(p.name,)]] for p in c.ports if p.direction == "output"
    }
    return TransitionSystem(
        circuit=c, inputs=inputs, state=state, init=init, next=nexts, outputs=outputs
    )


def _split_program(p: ac.ActionProgram):
    """Split into (concrete prefix, assume actions, guarantee actions)."""
    prefix: list[ac.Action] = []
    assumes: list[ac.Assume] = []
    guarantees: list[ac.Guarantee] = []
    symbolic = False
    for i, a in enumerate(p.actions):
        if isinstance(a, (ac.Assume, ac.Guarantee)):
            symbolic = True
            if isinstance(a, ac.Assume):
                assumes.append(a)
            else:
                guarantees.append(a)
            continue
        if symbolic:
            raise FormalError(
                f"root[{i}]: only assume/guarantee may follow the first constraint action"
            )
        if isinstance(a, (ac.While, ac.If, ac.For, ac.Print)):
            raise FormalError(
                f"root[{i}]: {type(a).__name__} is not supported in formal programs"
            )
        if isinstance(a, ac.Poke) and not isinstance(a.value, ex.Const):
            raise FormalError(f"root[{i}]: formal prefix pokes must use constant values")
        if isinstance(a, ac.Expect):
            raise FormalError(f"root[{i}]: expect is not supported in formal programs")
        prefix.append(a)
    return prefix, assumes, guarantees


def lower_prefix(p: ac.ActionProgram, ts: TransitionSystem) -> TransitionSystem:
    """Specialize a transition system with a program's configuration prefix.

    The prefix runs concretely through the interpreter; final register values
    become the init constraint and unconstrained inputs freeze at their final
    poked values (0 if never poked). Assumptions become invariant constraints
    on the remaining symbolic inputs; guarantees become properties.
    """
    c = ts.circuit
    prefix, assumes, guarantees = _split_program(p)
    if not guarantees:
        raise FormalError("formal programs need at least one guarantee")

    sim = Simulation(compile_sim(c))
    for a in prefix:
        if isinstance(a, ac.Poke):
            sim.poke(a.ref, a.value.value)
        elif isinstance(a, ac.Eval):
            sim.do_eval()
        elif isinstance(a, ac.Step):
            sim.do_step(a.n)

    init = {r.name: sim.reg_values[r.name] for r in sim.model.registers}
    assumed_ports = {a.ref.path[0] for a in assumes}
    frozen = {
        name: sim.peek((name,)) for name in ts.inputs if name not in assumed_ports
    }
    symbolic_inputs = {name: w for name, w in ts.inputs.items() if name in assumed_ports}

    freeze_map = {name: ex.Const(v, ts.inputs[name]) for name, v in frozen.items()}
    nexts = {name: subst_vars(e, freeze_map) for name, e in ts.next.items()}
    outputs = {name: subst_vars(e, freeze_map) for name, e in ts.outputs.items()}

    # Constant-propagate registers that are fixed under the frozen inputs:
    # next(r) == r (or == init[r] outright) pins r at its init value.
    state = dict(ts.state)
    known: dict[str, ex.Expr] = {}
    changed = True
    while changed:
        changed = False
        for name in list(state):
            e = subst_vars(nexts[name], known)
            fixed = (isinstance(e, ex.Var) and e.name == name) or (
                isinstance(e, ex.Const) and e.value == init[name]
            )
            if fixed:
                known[name] = ex.Const(init[name], state[name])
                del state[name]
                changed = True
    if known:
        nexts = {n: subst_vars(e, known) for n, e in nexts.items() if n in state}
        outputs = {n: subst_vars(e, known) for n, e in outputs.items()}
    else:
        nexts = {n: e for n, e in nexts.items() if n in state}

    invariants = []
    for a in assumes:
        fv = ex.free_vars(a.predicate)
        port = a.ref.path[0]
        if fv:
            (var_name,) = fv
            invariants.append(
                subst_vars(a.predicate, {var_name: ex.Var(port, ts.inputs[port])})
            )
        else:
            invariants.append(a.predicate)  # constant predicate (e.g. unconstrained)

    return TransitionSystem(
        circuit=c,
        inputs=symbolic_inputs,
        state=state,
        init={n: v for n, v in init.items() if n in state},
        next=nexts,
        outputs=outputs,
        invariants=invariants,
        properties=[g.predicate for g in guarantees],
        frozen=frozen,
        prefix=tuple(prefix),
    )
