"""Bounded model checking and k-induction over lowered transition systems.

Unrolling binds each step's state variables directly to the blasted bits of
the previous step's next-state expressions (step 0 to the init constants), so
no equality clauses are needed. Property negations are checked one depth at a
time under solver assumptions, sharing one incrementally grown CNF, and the
shallowest counterexample is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import actions as ac
from .. import expr as ex
from ..circuit import CircuitDecl
from ..sim import Simulation, compile_sim
from .bitblast import Bitblaster, decode_bits
from .sat import Solver
from .ts import TransitionSystem, rename_step


@dataclass
class Counterexample:
    """Per-step input/state assignments violating a property at ``depth``."""

    depth: int
    property_index: int
    property: ex.Expr
    inputs: list[dict[str, int]] = field(default_factory=list)  # one dict per step 0..depth
    states: list[dict[str, int]] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "depth": self.depth,
            "property_index": self.property_index,
            "steps": [
                {"inputs": dict(self.inputs[i]), "state": dict(self.states[i])}
                for i in range(self.depth + 1)
            ],
        }


class _Unroller:
    """Incrementally blasts steps 0..d of a transition system into one CNF."""

    def __init__(self, ts: TransitionSystem, free_init: bool = False):
        self.ts = ts
        self.blaster = Bitblaster()
        self.solver = Solver(self.blaster.cnf)
        self.free_init = free_init
        self.depth = -1
        self.props = [ts.closed_property(i) for i in range(len(ts.properties))]

    def extend_to(self, depth: int) -> None:
        b = self.blaster
        while self.depth < depth:
            i = self.depth + 1
            for name, w in self.ts.inputs.items():
                b.declare(f"{name}@{i}", w)
            if i == 0:
                for name, w in self.ts.state.items():
                    if self.free_init:
                        b.declare(f"{name}@0", w)
                    else:
                        b.bind(f"{name}@0", b.const_bits(self.ts.init[name], w))
            else:
                for name in self.ts.state:
                    bits = b.blast_bits(rename_step(self.ts.next[name], i - 1))
                    b.bind(f"{name}@{i}", bits)
            for inv in self.ts.invariants:
                b.cnf.add_clause([b.blast_bits(rename_step(inv, i))[0]])
            self.depth = i

    def property_lit(self, index: int, step: int) -> int:
        return self.blaster.blast_bits(rename_step(self.props[index], step))[0]

    def solve(self, assumptions) -> list[bool] | None:
        return self.solver.solve(assumptions)

    def extract(self, model, depth: int, prop_index: int) -> Counterexample:
        cex = Counterexample(depth, prop_index, self.ts.properties[prop_index])
        for i in range(depth + 1):
            cex.inputs.append(
                {
                    name: decode_bits(self.blaster.cnf.var_bits[f"{name}@{i}"], model)
                    for name in self.ts.inputs
                }
            )
            cex.states.append(
                {
                    name: decode_bits(self.blaster.cnf.var_bits[f"{name}@{i}"], model)
                    for name in self.ts.state
                }
            )
        return cex


def bmc(ts: TransitionSystem, bound: int) -> Counterexample | None:
    """Search for a property violation within `bound` transition steps.

    Returns the shallowest counterexample, or None when every property holds
    at every depth 0..bound (a bound certificate, not a proof).
    """
    if not ts.properties:
        raise ValueError("transition system has no properties to check")
    unroller = _Unroller(ts)
    for depth in range(bound + 1):
        unroller.extend_to(depth)
        for pi in range(len(ts.properties)):
            model = unroller.solve([-unroller.property_lit(pi, depth)])
            if model is not None:
                return unroller.extract(model, depth, pi)
    return None


def k_induction(ts: TransitionSystem, k: int):
    """Prove properties by k-induction: a (k-1)-deep base case plus a k-step
    inductive argument from an arbitrary run of property-satisfying states.

    Returns "proved", "unknown", or a base-case Counterexample.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not ts.properties:
        raise ValueError("transition system has no properties to check")
    cex = bmc(ts, k - 1)
    if cex is not None:
        return cex
    step = _Unroller(ts, free_init=True)
    step.extend_to(k)
    for pi in range(len(ts.properties)):
        assumptions = [step.property_lit(pi, i) for i in range(k)]
        assumptions.append(-step.property_lit(pi, k))
        if step.solve(assumptions) is not None:
            return "unknown"
    return "proved"


def replay_counterexample(
    c: CircuitDecl, p: ac.ActionProgram, cex: Counterexample
) -> bool:
    """Re-run a counterexample through the interpreter.

    Executes the program's concrete prefix, then drives the recorded input
    assignments one clock cycle per step. Returns True iff the violated
    property's predicate evaluates false at the counterexample depth, i.e.
    the interpreter reproduces the violation.
    """
    sim = Simulation(compile_sim(c))
    for a in p.actions:
        if isinstance(a, (ac.Assume, ac.Guarantee)):
            break
        if isinstance(a, ac.Poke):
            sim.poke(a.ref, ex.eval_pure(a.value, {}))
        elif isinstance(a, ac.Eval):
            sim.do_eval()
        elif isinstance(a, ac.Step):
            sim.do_step(a.n)
    for i in range(cex.depth + 1):
        for name, value in cex.inputs[i].items():
            sim.poke((name,), value)
        sim.do_eval()
        if i < cex.depth:
            sim.do_step(2)
    bindings = {name: sim.peek((name,)) for name in ex.free_vars(cex.property)}
    return ex.eval_pure(cex.property, bindings) == 0


# -- SMT-LIB2 emission -----------------------------------------------------------


def _smt_bv(e: ex.Expr, memo) -> str:
    """Value-context rendering: every expression is a bitvector term."""
    hit = memo.get(id(e))
    if hit is not None:
        return hit[1]
    out = _smt_bv_raw(e, memo)
    memo[id(e)] = (e, out)
    return out


def _smt_name(name: str) -> str:
    return "|" + name + "|" if "@" in name else name


def _smt_bv_raw(e: ex.Expr, memo) -> str:
    if isinstance(e, ex.Const):
        return f"(_ bv{e.value} {e.width})"
    if isinstance(e, ex.Var):
        return _smt_name(e.name)
    if isinstance(e, ex.Zext):
        return f"((_ zero_extend {e.width - e.child.width}) {_smt_bv(e.child, memo)})"
    if isinstance(e, ex.Trunc):
        return f"((_ extract {e.width - 1} 0) {_smt_bv(e.child, memo)})"
    if isinstance(e, ex.Unop):
        child = _smt_bv(e.child, memo)
        if e.op == "bitnot":
            return f"(bvnot {child})"
        if e.op == "neg":
            return f"(bvneg {child})"
        zero = f"(_ bv0 {e.child.width})"
        return f"(ite (= {child} {zero}) (_ bv1 1) (_ bv0 1))"  # logical not
    assert isinstance(e, ex.Binop)
    a, b = _smt_bv(e.left, memo), _smt_bv(e.right, memo)
    ops = {
        "add": "bvadd", "sub": "bvsub", "mul": "bvmul", "and": "bvand",
        "or": "bvor", "xor": "bvxor", "shl": "bvshl", "lshr": "bvlshr",
    }
    if e.op in ops:
        return f"({ops[e.op]} {a} {b})"
    w = e.left.width
    zero = f"(_ bv0 {w})"
    preds = {
        "eq": f"(= {a} {b})",
        "neq": f"(distinct {a} {b})",
        "ult": f"(bvult {a} {b})",
        "ule": f"(bvule {a} {b})",
        "ugt": f"(bvugt {a} {b})",
        "uge": f"(bvuge {a} {b})",
        "land": f"(and (distinct {a} {zero}) (distinct {b} {zero}))",
        "lor": f"(or (distinct {a} {zero}) (distinct {b} {zero}))",
    }
    return f"(ite {preds[e.op]} (_ bv1 1) (_ bv0 1))"


def _smt_bool(e: ex.Expr, memo) -> str:
    return f"(= {_smt_bv(e, memo)} (_ bv1 1))"


def emit_smt2(ts: TransitionSystem, bound: int, property_index: int) -> str:
    """Standalone QF_BV document: BMC unrolling with the property violated
    somewhere within the bound; sat means a counterexample exists."""
    memo: dict = {}
    lines = [
        "; bounded unrolling, one transition step per clock cycle",
        "(set-logic QF_BV)",
        "(set-option :produce-models true)",
    ]
    for i in range(bound + 1):
        for name, w in ts.inputs.items():
            lines.append(f"(declare-fun {_smt_name(f'{name}@{i}')} () (_ BitVec {w}))")
        for name, w in ts.state.items():
            lines.append(f"(declare-fun {_smt_name(f'{name}@{i}')} () (_ BitVec {w}))")
    for name, w in ts.state.items():
        lines.append(f"(assert (= {_smt_name(f'{name}@0')} (_ bv{ts.init[name]} {w})))")
    for i in range(bound + 1):
        for inv in ts.invariants:
            lines.append(f"(assert {_smt_bool(rename_step(inv, i), memo)})")
        if i > 0:
            for name in ts.state:
                upd = _smt_bv(rename_step(ts.next[name], i - 1), memo)
                lines.append(f"(assert (= {_smt_name(f'{name}@{i}')} {upd}))")
    prop = ts.closed_property(property_index)
    negs = " ".join(f"(not {_smt_bool(rename_step(prop, i), memo)})" for i in range(bound + 1))
    if bound == 0:
        lines.append(f"(assert {negs})")
    else:
        lines.append(f"(assert (or {negs}))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"
