import json
import re
from pathlib import Path

import pytest

from faultline import actions as ac
from faultline import fixtures as fx
from faultline.codegen import (
    BUILTIN_DIALECTS,
    SvDialect,
    emit_cxx,
    emit_dut_verilog,
    emit_sv,
    load_dialects,
)
from faultline.errors import CodegenError
from faultline.tester import Tester, var

GOLDENS = Path(__file__).parent / "goldens"


def emission_fixtures():
    add = fx.add16()
    rl = fx.ready_loop()
    return {
        "add16": (add, fx.add16_program(add)),
        "while_loop": (rl, fx.ready_loop_program(rl)),
        "print": (add, fx.print_program(add)),
    }


@pytest.mark.parametrize("fixture", ["add16", "while_loop", "print"])
@pytest.mark.parametrize("dialect", sorted(BUILTIN_DIALECTS))
def test_sv_goldens(fixture, dialect):
    circuit, program = emission_fixtures()[fixture]
    tb = emit_sv(program, circuit, BUILTIN_DIALECTS[dialect])
    golden = (GOLDENS / "sv" / f"{fixture}__{dialect}.sv").read_bytes()
    assert tb.text.encode() == golden


@pytest.mark.parametrize("fixture", ["add16", "while_loop", "print"])
def test_cxx_goldens(fixture):
    circuit, program = emission_fixtures()[fixture]
    tb = emit_cxx(program, circuit)
    golden = (GOLDENS / "cxx" / f"{fixture}.cpp").read_bytes()
    assert tb.text.encode() == golden


def test_dut_verilog_goldens():
    assert emit_dut_verilog(fx.add16()).text.encode() == (GOLDENS / "verilog" / "add16_dut.v").read_bytes()
    assert (
        emit_dut_verilog(fx.ready_loop()).text.encode()
        == (GOLDENS / "verilog" / "ready_loop_dut.v").read_bytes()
    )


def test_emission_deterministic():
    circuit, program = emission_fixtures()["while_loop"]
    a = emit_sv(program, circuit, BUILTIN_DIALECTS["generic"]).text
    b = emit_sv(program, circuit, BUILTIN_DIALECTS["generic"]).text
    assert a == b
    assert emit_cxx(program, circuit).text == emit_cxx(program, circuit).text
    assert "\r" not in a  # LF only


def _sv_counts(text: str, circuit) -> dict:
    inputs = [p.name for p in circuit.ports if p.direction == "input"]
    poke_re = re.compile(rf"^\s*(?:{'|'.join(inputs)}) = (?!~)", re.MULTILINE)
    init_lines = len(inputs)  # every input is zeroed once in the preamble
    return {
        "poke": len(poke_re.findall(text)) - init_lines,
        "expect": text.count("!=="),
        "while": len(re.findall(r"^\s*while \(", text, re.MULTILINE)),
        "for": len(re.findall(r"^\s*for \(", text, re.MULTILINE)),
        "print": len(re.findall(r"^\s*\$write\(", text, re.MULTILINE)),
    }


@pytest.mark.parametrize("fixture", ["add16", "while_loop", "print"])
def test_sv_structural_fidelity(fixture):
    circuit, program = emission_fixtures()[fixture]
    text = emit_sv(program, circuit, BUILTIN_DIALECTS["generic"]).text
    counts = ac.count_actions(program.actions)
    got = _sv_counts(text, circuit)
    assert got["poke"] == counts.get("poke", 0)
    assert got["expect"] == counts.get("expect", 0)
    assert got["while"] == counts.get("while", 0)
    assert got["for"] == counts.get("for", 0)
    assert got["print"] == counts.get("print", 0)


def test_cxx_structural_fidelity():
    c = fx.passthrough(8)
    t = Tester(c)
    body, idx = t.begin_for(5)
    body.poke("I", idx)
    body.eval()
    body.expect("O", idx)
    body.close()
    program = t.finalize()
    text = emit_cxx(program, c).text
    counts = ac.count_actions(program.actions)
    assert text.count("__fl_check(") - text.count("void __fl_check(") == counts["expect"]
    assert len(re.findall(r"^\s*for \(", text, re.MULTILINE)) == counts["for"]
    assert len(re.findall(r"^\s*__fl_top->I = ", text, re.MULTILINE)) == counts["poke"]


def test_sv_step_emits_clock_toggles():
    c = fx.dff(4)
    t = Tester(c, clock="clk")
    t.poke("D", 9)
    t.step(2)
    t.expect("Q", 9)
    text = emit_sv(t.finalize(), c, BUILTIN_DIALECTS["generic"]).text
    assert "repeat (2) begin clk = ~clk; #1; end" in text


def test_cxx_step_two_toggle_eval_pairs():
    c = fx.dff(4)
    t = Tester(c, clock="clk")
    t.step(2)
    text = emit_cxx(t.finalize(), c).text
    assert text.count("__fl_top->clk = !__fl_top->clk; __fl_top->eval();") == 2


def test_empty_program_emits_finish(add16):
    p = Tester(add16).finalize()
    text = emit_sv(p, add16, BUILTIN_DIALECTS["generic"]).text
    assert "$finish;" in text and "initial begin" in text


def test_hierarchical_peek_renders_through_dut():
    c = fx.dff(1)
    t = Tester(c, clock="clk")
    t.expect("Q", t.peek(["ff", "Q"]))
    text = emit_sv(t.finalize(), c, BUILTIN_DIALECTS["generic"]).text
    assert "__fl_dut.ff.Q" in text
    cxx = emit_cxx(t.finalize(), c).text
    assert "__fl_top->rootp->DFF__DOT__ff__DOT__Q" in cxx


def test_residual_constraints_rejected(alu):
    t = Tester(alu, clock="clk")
    t.assume("a", var("a", 4).ult(8))
    t.guarantee(var("c", 4).uge(var("a", 4)))
    p = t.finalize()
    with pytest.raises(CodegenError):
        emit_sv(p, alu, BUILTIN_DIALECTS["generic"])
    with pytest.raises(CodegenError):
        emit_cxx(p, alu)


def test_cxx_wide_ports_rejected():
    wide = fx._circuit(fx.add_doc(96, name="Add96"))
    p = fx.add16_program(wide, expected=5)
    with pytest.raises(CodegenError):
        emit_cxx(p, wide)


def test_sv_handles_any_width():
    wide = fx._circuit(fx.add_doc(96, name="Add96"))
    t = Tester(wide)
    t.poke("in0", (1 << 96) - 1)
    t.poke("in1", 1)
    t.eval()
    t.expect("out", 0)
    text = emit_sv(t.finalize(), wide, BUILTIN_DIALECTS["generic"]).text
    assert f"96'd{(1 << 96) - 1}" in text


def test_generated_names_carry_reserved_prefix():
    doc = {
        "name": "Shadow",
        "ports": [
            {"name": "failures", "dir": "input", "type": "bit"},
            {"name": "dut", "dir": "input", "type": "bit"},
            {"name": "fd", "dir": "output", "type": "bit"},
        ],
        "instances": [{"name": "mix", "kind": "xor", "params": {"width": 1}}],
        "nets": [
            {"from": "failures", "to": ["mix.in0"]},
            {"from": "dut", "to": ["mix.in1"]},
            {"from": "mix.out", "to": ["fd"]},
        ],
    }
    c = fx._circuit(doc)
    t = Tester(c)
    t.poke("failures", 1)
    t.eval()
    t.expect("fd", 1)
    text = emit_sv(t.finalize(), c, BUILTIN_DIALECTS["generic"]).text
    # user signals keep their names; bookkeeping identifiers are prefixed
    assert "reg failures;" in text
    assert "integer __fl_failures;" in text
    assert "Shadow __fl_dut (" in text


def test_dialect_template_placeholder_checked():
    with pytest.raises(ValueError):
        SvDialect(name="bad", waveform_command="$dump({file});")
    with pytest.raises(ValueError):
        SvDialect(name="bad", waveform_command="", file_io_style="exotic")


def test_load_dialects_json(tmp_path):
    cfgfile = tmp_path / "dialects.json"
    cfgfile.write_text(
        json.dumps(
            {
                "mysim": {
                    "waveform_command": "$record({top});",
                    "file_io_style": "standard",
                    "timescale": "1ps/1ps",
                }
            }
        )
    )
    loaded = load_dialects(str(cfgfile))
    assert loaded["mysim"].timescale == "1ps/1ps"
    circuit, program = emission_fixtures()["add16"]
    text = emit_sv(program, circuit, loaded["mysim"]).text
    assert "$record(Add16_tb);" in text and "`timescale 1ps/1ps" in text


def test_load_dialects_toml(tmp_path):
    cfgfile = tmp_path / "dialects.toml"
    cfgfile.write_text(
        '[quiet]\nwaveform_command = ""\ntimescale = "1ns/1ns"\n'
    )
    loaded = load_dialects(str(cfgfile))
    assert loaded["quiet"].waveform_command == ""
    circuit, program = emission_fixtures()["add16"]
    assert "$dumpvars" not in emit_sv(program, circuit, loaded["quiet"]).text
