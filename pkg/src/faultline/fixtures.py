"""Canonical example circuits and programs.

These mirror the classic introductory testbenches: a 16-bit adder poked with
3 and 2, a resettable register, a ready/count handshake loop, and a small
configurable ALU used by the constrained-random and formal comparisons.
Netlists are built as JSON documents and run through the parser, so every
fixture also exercises ingestion.
"""

from __future__ import annotations

import json

from .circuit import CircuitDecl, parse_netlist
from .expr import Var
from .tester import Tester


def _circuit(doc: dict) -> CircuitDecl:
    return parse_netlist(json.dumps(doc))


def add_doc(width: int = 16, name: str | None = None) -> dict:
    return {
        "name": name or f"Add{width}",
        "ports": [
            {"name": "in0", "dir": "input", "type": {"bv": width}},
            {"name": "in1", "dir": "input", "type": {"bv": width}},
            {"name": "out", "dir": "output", "type": {"bv": width}},
        ],
        "instances": [{"name": "adder", "kind": "add", "params": {"width": width}}],
        "nets": [
            {"from": "in0", "to": ["adder.in0"]},
            {"from": "in1", "to": ["adder.in1"]},
            {"from": "adder.out", "to": ["out"]},
        ],
    }


def add16() -> CircuitDecl:
    return _circuit(add_doc(16))


def passthrough_doc(width: int = 1) -> dict:
    ptype = "bit" if width == 1 else {"bv": width}
    return {
        "name": f"Pass{width}",
        "ports": [
            {"name": "I", "dir": "input", "type": ptype},
            {"name": "O", "dir": "output", "type": ptype},
        ],
        "instances": [],
        "nets": [{"from": "I", "to": ["O"]}],
    }


def passthrough(width: int = 1) -> CircuitDecl:
    return _circuit(passthrough_doc(width))


def inverter_doc() -> dict:
    return {
        "name": "Inv",
        "ports": [
            {"name": "I", "dir": "input", "type": "bit"},
            {"name": "O", "dir": "output", "type": "bit"},
        ],
        "instances": [{"name": "inv", "kind": "not", "params": {"width": 1}}],
        "nets": [{"from": "I", "to": ["inv.in"]}, {"from": "inv.out", "to": ["O"]}],
    }


def inverter() -> CircuitDecl:
    return _circuit(inverter_doc())


def dff_doc(width: int = 1, name: str = "DFF") -> dict:
    dtype = "bit" if width == 1 else {"bv": width}
    return {
        "name": name,
        "ports": [
            {"name": "clk", "dir": "input", "type": "clock"},
            {"name": "D", "dir": "input", "type": dtype},
            {"name": "Q", "dir": "output", "type": dtype},
        ],
        "instances": [{"name": "ff", "kind": "register", "params": {"width": width}}],
        "nets": [
            {"from": "clk", "to": ["ff.clk"]},
            {"from": "D", "to": ["ff.D"]},
            {"from": "ff.Q", "to": ["Q"]},
        ],
    }


def dff(width: int = 1) -> CircuitDecl:
    return _circuit(dff_doc(width))


def reset_reg_doc(width: int = 4, reset_value: int = 5) -> dict:
    return {
        "name": "ResetReg",
        "ports": [
            {"name": "clk", "dir": "input", "type": "clock"},
            {"name": "rstn", "dir": "input", "type": "async_reset_n"},
            {"name": "D", "dir": "input", "type": {"bv": width}},
            {"name": "Q", "dir": "output", "type": {"bv": width}},
        ],
        "instances": [
            {
                "name": "ff",
                "kind": "register",
                "params": {"width": width, "has_async_reset_n": True, "reset_value": reset_value},
            }
        ],
        "nets": [
            {"from": "clk", "to": ["ff.clk"]},
            {"from": "rstn", "to": ["ff.arst_n"]},
            {"from": "D", "to": ["ff.D"]},
            {"from": "ff.Q", "to": ["Q"]},
        ],
    }


def reset_reg() -> CircuitDecl:
    return _circuit(reset_reg_doc())


def ready_loop_doc(cycles: int = 5) -> dict:
    """Handshake circuit: `ready` stays high for `cycles` clock cycles while
    `count` counts the elapsed cycles, then both freeze."""
    assert 1 <= cycles <= 7
    return {
        "name": "ReadyLoop",
        "ports": [
            {"name": "clk", "dir": "input", "type": "clock"},
            {"name": "ready", "dir": "output", "type": "bit"},
            {"name": "count", "dir": "output", "type": {"bv": 4}},
        ],
        "instances": [
            {"name": "rem", "kind": "register", "params": {"width": 3, "reset_value": cycles}},
            {"name": "cyc", "kind": "register", "params": {"width": 4}},
            {"name": "zero", "kind": "const", "params": {"width": 3, "value": 0}},
            {"name": "one3", "kind": "const", "params": {"width": 3, "value": 1}},
            {"name": "one4", "kind": "const", "params": {"width": 4, "value": 1}},
            {"name": "done", "kind": "eq", "params": {"width": 3}},
            {"name": "run", "kind": "not", "params": {"width": 1}},
            {"name": "deccalc", "kind": "sub", "params": {"width": 3}},
            {"name": "remnext", "kind": "mux", "params": {"width": 3}},
            {"name": "inccalc", "kind": "add", "params": {"width": 4}},
            {"name": "cycnext", "kind": "mux", "params": {"width": 4}},
        ],
        "nets": [
            {"from": "clk", "to": ["rem.clk", "cyc.clk"]},
            {"from": "rem.Q", "to": ["done.in0", "deccalc.in0", "remnext.in0"]},
            {"from": "zero.out", "to": ["done.in1"]},
            {"from": "done.out", "to": ["run.in"]},
            {"from": "run.out", "to": ["ready", "remnext.sel", "cycnext.sel"]},
            {"from": "one3.out", "to": ["deccalc.in1"]},
            {"from": "deccalc.out", "to": ["remnext.in1"]},
            {"from": "remnext.out", "to": ["rem.D"]},
            {"from": "cyc.Q", "to": ["inccalc.in0", "cycnext.in0", "count"]},
            {"from": "one4.out", "to": ["inccalc.in1"]},
            {"from": "inccalc.out", "to": ["cycnext.in1"]},
            {"from": "cycnext.out", "to": ["cyc.D"]},
        ],
    }


def ready_loop(cycles: int = 5) -> CircuitDecl:
    return _circuit(ready_loop_doc(cycles))


def toggler_doc() -> dict:
    """One-bit signal that flips every clock cycle (a divide-by-two)."""
    return {
        "name": "Toggler",
        "ports": [
            {"name": "clk", "dir": "input", "type": "clock"},
            {"name": "b", "dir": "output", "type": "bit"},
        ],
        "instances": [
            {"name": "ff", "kind": "register", "params": {"width": 1}},
            {"name": "flip", "kind": "not", "params": {"width": 1}},
        ],
        "nets": [
            {"from": "clk", "to": ["ff.clk"]},
            {"from": "ff.Q", "to": ["flip.in", "b"]},
            {"from": "flip.out", "to": ["ff.D"]},
        ],
    }


def toggler() -> CircuitDecl:
    return _circuit(toggler_doc())


def counter_doc(width: int = 3, name: str | None = None) -> dict:
    return {
        "name": name or f"Counter{width}",
        "ports": [
            {"name": "clk", "dir": "input", "type": "clock"},
            {"name": "out", "dir": "output", "type": {"bv": width}},
        ],
        "instances": [
            {"name": "cnt", "kind": "register", "params": {"width": width}},
            {"name": "one", "kind": "const", "params": {"width": width, "value": 1}},
            {"name": "inc", "kind": "add", "params": {"width": width}},
        ],
        "nets": [
            {"from": "clk", "to": ["cnt.clk"]},
            {"from": "cnt.Q", "to": ["inc.in0", "out"]},
            {"from": "one.out", "to": ["inc.in1"]},
            {"from": "inc.out", "to": ["cnt.D"]},
        ],
    }


def counter(width: int = 3) -> CircuitDecl:
    return _circuit(counter_doc(width))


def alu_doc(width: int = 4, swap_add_sub: bool = False, name: str | None = None) -> dict:
    """Small ALU with a clocked opcode register (0 add, 1 sub, 2 and, 3 or).

    With swap_add_sub the decoder wires add and sub the wrong way round,
    which is the classic injected bug the formal/random comparison hunts.
    """
    low0, low1 = ("subop", "addop") if swap_add_sub else ("addop", "subop")
    return {
        "name": name or ("AluBuggy" if swap_add_sub else "Alu"),
        "ports": [
            {"name": "clk", "dir": "input", "type": "clock"},
            {"name": "opcode_en", "dir": "input", "type": "bit"},
            {"name": "opcode", "dir": "input", "type": {"bv": 2}},
            {"name": "a", "dir": "input", "type": {"bv": width}},
            {"name": "b", "dir": "input", "type": {"bv": width}},
            {"name": "c", "dir": "output", "type": {"bv": width}},
        ],
        "instances": [
            {"name": "opreg", "kind": "register", "params": {"width": 2}},
            {"name": "opsel", "kind": "mux", "params": {"width": 2}},
            {"name": "addop", "kind": "add", "params": {"width": width}},
            {"name": "subop", "kind": "sub", "params": {"width": width}},
            {"name": "andop", "kind": "and", "params": {"width": width}},
            {"name": "orop", "kind": "or", "params": {"width": width}},
            {"name": "op0", "kind": "slice", "params": {"width": 2, "lo": 0, "hi": 1}},
            {"name": "op1", "kind": "slice", "params": {"width": 2, "lo": 1, "hi": 2}},
            {"name": "lowsel", "kind": "mux", "params": {"width": width}},
            {"name": "highsel", "kind": "mux", "params": {"width": width}},
            {"name": "outsel", "kind": "mux", "params": {"width": width}},
        ],
        "nets": [
            {"from": "clk", "to": ["opreg.clk"]},
            {"from": "opcode_en", "to": ["opsel.sel"]},
            {"from": "opcode", "to": ["opsel.in1"]},
            {"from": "opreg.Q", "to": ["opsel.in0", "op0.in", "op1.in"]},
            {"from": "opsel.out", "to": ["opreg.D"]},
            {"from": "a", "to": ["addop.in0", "subop.in0", "andop.in0", "orop.in0"]},
            {"from": "b", "to": ["addop.in1", "subop.in1", "andop.in1", "orop.in1"]},
            {"from": f"{low0}.out", "to": ["lowsel.in0"]},
            {"from": f"{low1}.out", "to": ["lowsel.in1"]},
            {"from": "andop.out", "to": ["highsel.in0"]},
            {"from": "orop.out", "to": ["highsel.in1"]},
            {"from": "op0.out", "to": ["lowsel.sel", "highsel.sel"]},
            {"from": "op1.out", "to": ["outsel.sel"]},
            {"from": "lowsel.out", "to": ["outsel.in0"]},
            {"from": "highsel.out", "to": ["outsel.in1"]},
            {"from": "outsel.out", "to": ["c"]},
        ],
    }


def alu(swap_add_sub: bool = False, width: int = 4) -> CircuitDecl:
    return _circuit(alu_doc(width, swap_add_sub))


# -- programs -----------------------------------------------------------------


def add16_program(c: CircuitDecl | None = None, expected: int = 5):
    """The classic adder check: poke 3 and 2, eval, expect the sum."""
    c = c or add16()
    t = Tester(c)
    t.poke("in0", 3)
    t.poke("in1", 2)
    t.eval()
    t.expect("out", expected)
    return t.finalize()


def ready_loop_program(c: CircuitDecl | None = None, expected_cycles: int = 5):
    """Spin on `ready`, stepping a full cycle per iteration, then check `count`."""
    c = c or ready_loop()
    t = Tester(c, clock="clk")
    t.eval()
    loop = t.begin_while(t.peek("ready"))
    loop.expect("ready", 1)
    loop.step(2)
    loop.close()
    t.expect("count", expected_cycles)
    return t.finalize()


def alu_program(c: CircuitDecl | None = None, width: int = 4):
    """Configure the opcode register for add, then constrain and check.

    The assumptions keep both operands below half range so the add cannot
    wrap; the guarantee then demands the result is >= both operands.
    """
    c = c or alu()
    half = 1 << (width - 1)
    t = Tester(c, clock="clk")
    t.poke("opcode_en", 1)
    t.poke("opcode", 0)
    t.step(2)
    t.poke("opcode_en", 0)
    t.step(2)
    t.assume("a", Var("a", width).ult(half))
    t.assume("b", Var("b", width).ult(half))
    va, vb, vc = Var("a", width), Var("b", width), Var("c", width)
    t.guarantee(vc.uge(va).land(vc.uge(vb)))
    return t.finalize()


def print_program(c: CircuitDecl | None = None):
    """Small print-heavy program used by the emission goldens."""
    c = c or add16()
    t = Tester(c)
    t.poke("in0", 3)
    t.poke("in1", 2)
    t.eval()
    t.print("sum=%d hex=%x bits=%b\n", t.peek("out"), t.peek("out"), t.peek("in0"))
    t.print("done\n")
    return t.finalize()


def reset_program(c: CircuitDecl | None = None, explicit: bool = True):
    """Load a register with a non-reset value, pulse reset, check it cleared."""
    c = c or reset_reg()
    t = Tester(c, clock="clk")
    t.poke("rstn", 1)
    t.poke("D", 9)
    t.step(2)
    t.expect("Q", 9)
    t.reset_sequence("rstn" if explicit else None)
    t.expect("Q", 5)
    return t.finalize()
